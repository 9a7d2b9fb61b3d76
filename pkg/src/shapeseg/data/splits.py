"""Leave-one-out split construction."""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence


def leave_one_out_splits(subjects: Sequence[str]) -> list[tuple[list[str], str]]:
    """Return one (train_ids, test_id) split per subject.

    Each subject is the test case exactly once; the training ids keep the
    original ordering with the test subject removed.
    """
    subjects = list(subjects)
    if len(subjects) < 2:
        raise ValueError(f"leave-one-out needs at least 2 subjects, got {len(subjects)}")
    duplicates = [sid for sid, n in Counter(subjects).items() if n > 1]
    if duplicates:
        raise ValueError(f"duplicate subject ids: {duplicates}")
    return [([sid for sid in subjects if sid != test_id], test_id) for test_id in subjects]
