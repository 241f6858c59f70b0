# model/__init__.py
from .dbn import DbnModel, Factorization, factor_parent_groups, factor_transition_cpd
from .generators import (
    GeneratorConfig,
    example33_cpd,
    generate_example41_model,
    generate_figure1_model,
)
from .model_io import load_model, parse_cpd_document, parse_model, serialize_cpd_document, serialize_model
from .two_chain import TwoChainSystem, generate_two_chain_system
