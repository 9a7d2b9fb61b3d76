"""shapeseg: shape-prior and adversarially regularized volumetric segmentation.

A 2D encoder-decoder network predicts per-slice foreground probabilities;
training can add a conditional realism critic and a frozen auto-encoder
latent distance as regularizers on top of the dice objective. Slices are
stacked and filtered to the largest connected component, then scored with
overlap and distance metrics in a leave-one-out ablation harness.
"""

__version__ = "0.1.0"
