# filtering/__init__.py
from .bk import FactoredBelief, bk_predict_step, bk_step, initial_belief
from .comparison import ErrorSeries, run_comparison
from .exact import exact_filter_step, exact_predict_step
from .sampling import Trajectory, sample_trajectory
