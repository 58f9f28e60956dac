"""Ridge regression bound evaluation on arbitrary covariance spectra.

Thin python surface over the C++ core: spectra and effective ranks, the
matched upper/lower bound pair with its ratio caps, the dual-form ridge
solver with exact bias/variance decomposition, Monte Carlo sweeps, and the
concentration audits.
"""

try:
    from ._ridgebounds import *  # noqa: F401,F403
    from ._ridgebounds import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension lives next to the package
    from _ridgebounds import *  # noqa: F401,F403
    from _ridgebounds import __version__  # noqa: F401
