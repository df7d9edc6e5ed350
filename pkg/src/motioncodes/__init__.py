"""Motion-code taxonomy codec, embedding model, and verb-classification harness."""

from .config import RunConfig, TrainConfig, config_hash, fusion_defaults, load_run_config
from .data import (
    Dataset,
    Example,
    SynthConfig,
    WordVectorTable,
    dataset_stats,
    load_dataset,
    load_word_vectors,
    save_dataset,
    synth_generate,
)
from .embedding import (
    LambdaWeights,
    MotionModel,
    embed,
    eval_embedding,
    infer_code,
    loss_LM,
    predict_components,
    train_embedding,
)
from .evaluation import EvalReport, SweepResult, corruption_sweep, per_class_delta, top1_accuracy
from .taxonomy import (
    DofClass,
    InteractionType,
    MotionCode,
    VerbCodeTable,
    codes_for_verb,
    component_classes,
    enumerate_codes,
    format_code,
    hamming,
    one_hot_embedding,
    parse_code,
    verbs_for_code,
    weighted_distance,
)
from .verbmodel import (
    Corrupted,
    FusionMLP,
    GroundTruth,
    Predicted,
    VerbClassifier,
    motion_features,
    predict_fused,
    predict_verb,
    train_baseline,
    train_fusion,
)

__version__ = "0.1.0"
