"""Smart loop executors: loop feature analysis, logistic-regression training,
and model-driven dispatch decisions (execution policy, chunk size, prefetch
distance), backed by the C++ core."""

from smartexec._core import (
    BinaryModel,
    MultinomialModel,
    StaticFeatures,
    WeightsBundle,
    analyze_text,
    chunk_size_determination,
    kernel_names,
    load_weights,
    make_feature_vector,
    matmul_loop_spec,
    predict_binary,
    predict_class,
    prefetching_distance_determination,
    run_kernel,
    run_loop,
    save_weights,
    seq_par,
    sigmoid,
    softmax_probs,
    stencil_loop_spec,
    stream_loop_spec,
    train_binary,
    train_multinomial,
)

__all__ = [
    "BinaryModel",
    "MultinomialModel",
    "StaticFeatures",
    "WeightsBundle",
    "analyze_text",
    "chunk_size_determination",
    "kernel_names",
    "load_weights",
    "make_feature_vector",
    "matmul_loop_spec",
    "predict_binary",
    "predict_class",
    "prefetching_distance_determination",
    "run_kernel",
    "run_loop",
    "save_weights",
    "seq_par",
    "sigmoid",
    "softmax_probs",
    "stencil_loop_spec",
    "stream_loop_spec",
    "train_binary",
    "train_multinomial",
]

__version__ = "0.1.0"
