"""Search for a marked vertex on a 2D torus with a staggered quantum walk and a weighted selfloop."""
from .errors import ConfigurationError, NumericError, PoleError
from .grid import GridDims
from .operators import InterpolationParams, MarkedConfig
from .search import RunConfig, SearchTrajectory, WalkSearch

__all__ = ["ConfigurationError", "NumericError", "PoleError", "GridDims", "InterpolationParams",
           "MarkedConfig", "RunConfig", "SearchTrajectory", "WalkSearch"]
__version__ = "0.1.0"
