"""Local group invariant kernel features: orbit-averaged random Fourier and
Nystrom feature maps with seeded, reproducible sampling."""

from ._core import *  # noqa: F401,F403
