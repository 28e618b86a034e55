"""LLM-guided ansatz search for quantum GAN generators.

Statevector simulation, a parameter-shift quantum generator, a NumPy
discriminator, AMSGRAD training and the propose/train/feedback loop.
"""

from .ansatz import AnsatzSpec, Entanglement, TwoLocalConfig, build_circuit, entanglement_pairs, parse_proposal
from .campaign import CampaignLog, run_campaign, resume_campaign
from .config import CampaignConfig, load_config
from .trainer import TrainConfig, discretize_target, kl_divergence, train, train_repeats

__version__ = "0.1.0"
