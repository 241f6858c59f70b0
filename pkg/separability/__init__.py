# separability/__init__.py
from .closed_form import degree_case1, degree_case2, degree_case3
from .factorization import RankedFactorization, SelfSufficiency, is_self_sufficient, search_factorization
from .lp import degree_lp
from .methods import METHODS, DegreeAnalysis, analyze_cpd, choose_method, degree
from .persistence import persistence
from .sufficiency import SufficiencyWitness, max_mixed_difference, sufficiency_witness
from .types import ClosedFormTrace, Grouping, PersistenceResult, SeparableDecomposition
