"""qser: hybrid classical-quantum speech emotion recognition toolkit.

A simulated, differentiable pipeline: Mel-spectrogram features -> CNN ->
quantum embedding -> parameterised quantum circuit -> quantum measurement ->
classifier, plus a training/evaluation/grid-search harness.
"""

from .errors import (
    CircuitError,
    ConfigError,
    DataError,
    EmbeddingError,
    EvaluationError,
    IngestionError,
    LayerError,
    ModelError,
    QserError,
    TrainingAbortError,
)
from .qstate import (
    CircuitSpec,
    GateOp,
    StateVector,
    apply_circuit,
    apply_gate,
    dense_unitary,
    new_zero_state,
    reduced_purity,
)
from .embed import (
    AmplitudeEmbedding,
    AngleEmbedding,
    IQPEmbedding,
    amplitude_embed,
    angle_embed,
    iqp_embed,
)
from .qcircuit import (
    RandomLayers,
    StronglyEntangling,
    build_random_layers,
    build_strongly_entangling,
    param_count,
)
from .measure import Measurement, expect_paulix, expect_pauliz, measure, prob_one_z, probabilities
from .qgrad import QuantumLayerConfig, input_grad, param_shift_grad, quantum_forward
from .config import GridSpace, HyperParams, RunConfig, load_run_config
from .data import Example, SplitSpec, binarize_valence, generate_synthetic, load_manifest, split
from .features import AudioClip, MelConfig, load_wav, mel_spectrogram, resample
from .model import ModelDef, ModelDims, build_classical, build_hybrid, count_params
from .train import EvalReport, enumerate_grid, evaluate, grid_search, load_model, save_model, train_model

__version__ = "0.1.0"
