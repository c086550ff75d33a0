"""Wasserstein-regularised PAC-Bayes learning on plain numpy."""
from .batch import BatchConfig, alg1_train, erm_train, l2_train, make_partition
from .bounds import BoundCertificate
from .cocob import cocob_init, cocob_step
from .data import Dataset, load_csv, load_idx, split_halves
from .losses import LossConfig, lipschitz_constant
from .models import Hypothesis, ModelSpec, init_weights
from .online import OnlineConfig, ogd_train, online_train
from .ot import DiscreteMeasure, w1_exact

__version__ = "0.1.0"
