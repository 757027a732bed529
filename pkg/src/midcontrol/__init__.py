"""Bayesian MLP dispute classifiers with relevance ranking and peace-seeking control."""

from .ard import ArdResult, train_ard
from .control import (
    CampaignReport,
    ControlOutcome,
    ControlProblem,
    SaConfig,
    control_campaign,
    control_dyad,
    gss_minimize,
    sa_minimize,
)
from .data import (
    Dataset,
    Dyad,
    GeneratorConfig,
    NormalizationSpec,
    generate_synthetic_population,
    make_balanced_training_set,
    normalize,
    parse_dyad_csv,
)
from .evaluation import ConfusionMatrix, RocCurve, confusion, roc_auc
from .evidence import EvidenceModel, gauss_predict, reestimate, train_evidence
from .ga import Chromosome, GaConfig, decode, evolve
from .hmc import (
    ChainState,
    HmcConfig,
    PosteriorEnsemble,
    leapfrog_trajectory,
    predict_mean,
    sample_posterior,
)
from .mlp import (
    HyperParameters,
    NetworkArchitecture,
    forward,
    gradient,
    neg_log_posterior,
)
from .persistence import load_model, save_model
from .scg import ScgConfig, minimize

__version__ = "0.1.0"
