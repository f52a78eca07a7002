"""
Structure and property guidance for the reverse diffusion process
"""
from molforge.guidance.config import GuidanceConfig, PropertyTarget
from molforge.guidance.modules import (
    combine_property,
    combine_structure,
    conditioning_values,
    fuse_scores,
    fused_estimate,
    pcm_gradient,
    pcm_predict,
    property_gradients,
    scm_predict,
)
from molforge.guidance.predictor import PredictorSpec, PropertyPredictor, predictor_file
from molforge.guidance.sampler import SampleResult, SampleTrace, StepRecord, sample, sample_many
