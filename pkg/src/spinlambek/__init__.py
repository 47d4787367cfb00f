"""NL◇ categorial grammar with proof search, term extraction and density-matrix semantics."""

from .deduction import (Derivation, Rule, SearchBudget, Sequent, check, expand_xleft, prove)
from .errors import *  # noqa: F401,F403
from .lexicon import Lexicon, default_lexicon_path, load_lexicon, loads_lexicon
from .pipeline import Report, run
from .semantics import (AmbiguousMeaning, Interpretation, Model, ambiguous_sum,
                        beta_soundness_check, interpret)
from .spin import SpinOperatorConfig
from .syntax import (SpaceConfig, carrier_signature, format_formula, full_signature,
                     parse_formula, parse_structure, spatial_signature)
from .terms import extract_term, format_term, normalize

__version__ = "0.1.0"
