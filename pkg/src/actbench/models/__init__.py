from .chain import expected_counts, forward_backward, path_score, viterbi_decode
from .crf import (
    CrfParams,
    FcrfParams,
    crf_decode,
    crf_forward_backward,
    crf_objective,
    fcrf_decode,
    fcrf_objective,
    fit_crf,
    fit_fcrf,
    train_crf,
    train_fcrf,
)
from .hmm import (
    FhmmParams,
    HmmParams,
    hmm_log_likelihood,
    train_fhmm,
    train_hmm,
    viterbi,
    viterbi_fhmm,
)
from .lbfgs import LbfgsResult, minimize_lbfgs
from .rnn import (
    RnnConfig,
    RnnOutputs,
    RnnParams,
    RnnTrace,
    init_rnn_params,
    rnn_backward,
    rnn_decode,
    rnn_forward,
    rnn_loss,
    rnn_targets,
    train_rnn,
)
from .store import ModelFile, ModelParams, count_parameters, load_model, save_model

__all__ = [
    "CrfParams",
    "FcrfParams",
    "FhmmParams",
    "HmmParams",
    "LbfgsResult",
    "ModelFile",
    "ModelParams",
    "RnnConfig",
    "RnnOutputs",
    "RnnParams",
    "RnnTrace",
    "count_parameters",
    "crf_decode",
    "crf_forward_backward",
    "crf_objective",
    "expected_counts",
    "fcrf_decode",
    "fcrf_objective",
    "fit_crf",
    "fit_fcrf",
    "forward_backward",
    "hmm_log_likelihood",
    "init_rnn_params",
    "load_model",
    "minimize_lbfgs",
    "path_score",
    "rnn_backward",
    "rnn_decode",
    "rnn_forward",
    "rnn_loss",
    "rnn_targets",
    "save_model",
    "train_crf",
    "train_fcrf",
    "train_fhmm",
    "train_hmm",
    "train_rnn",
    "viterbi",
    "viterbi_decode",
    "viterbi_fhmm",
]
