"""Monte Carlo simulator and limit toolkit for a forbidden-transition X-ray search."""

try:
    from pepmc._pepmc import *  # noqa: F401,F403  (installed wheel layout)
    from pepmc._pepmc import __version__  # noqa: F401
except ImportError:
    from _pepmc import *  # noqa: F401,F403  (in-tree build layout)
    from _pepmc import __version__  # noqa: F401
