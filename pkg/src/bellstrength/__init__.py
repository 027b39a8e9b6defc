"""Statistical strength of Bell nonlocality experiments.

The strength of an experiment with quantum law ``q`` is the Kullback-Leibler
divergence (in bits) from ``q`` to the closest law a local hidden variable
model can produce.
"""
from .classical import (BellInequality, DeterministicVertex, canonicalize, cglmp_inequality, chsh_inequality,
                        classical_max, evaluate, ladder_inequality)
from .quantum import born_law, cglmp_model, ghz_model, ghz_pi, maximally_entangled
from .scenario import ProbabilityLaw, Scenario, SettingDistribution, check_no_signalling
from .strength import (FaceCertificate, StrengthResult, detection_threshold, discounted_strength, extract_face,
                       inf_divergence, ladder_sweep, optimize_schmidt)

__version__ = "0.1.0"
