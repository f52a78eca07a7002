"""
Pretraining, structure fine-tuning and property predictor training
"""
from molforge.training.base_trainer import LOSS_LOG_FILE, TorchTrainer, warmup_schedule
from molforge.training.config import PCM, PRETRAIN, SCM, STAGES, TrainConfig
from molforge.training.dataset import (
    Corpus,
    MoleculeDataset,
    build_vocabulary,
    load_corpus,
    make_loader,
    noise_emb,
    sample_steps,
)
from molforge.training.pcm import PredictorTrainer, descriptor_labels, train_pcm, validation_steps
from molforge.training.pretrain import STATS_FILE, DenoiserTrainer, StageResult, denoising_loss, train_pretrain
from molforge.training.scm import StructureTrainer, scaffold_indices, train_scm
