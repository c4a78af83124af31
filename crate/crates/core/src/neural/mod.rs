//! Small neural classifiers trained by full-batch gradient descent on the
//! cross-entropy loss, with optional I-score gating of inputs.

pub mod activation;
pub mod ffn;
pub mod rnn;
pub mod train;

pub use activation::{gamma_gate, Activation};
pub use ffn::{ffn_gradients, predict_ffn, train_ffn, train_ffn_from, FfnParams};
pub use rnn::{
    bptt_gradients, gd_step, hidden_gate, hidden_gate_scores, predict_rnn, rnn_forward, rnn_forward_gated, train_rnn,
    train_rnn_gated, RnnForward, RnnGates, RnnGrads, RnnParams, SequenceSet,
};
pub use train::{cross_entropy, mean_cross_entropy, EpochRecord, LearningCurve, TrainConfig, LOSS_CLAMP};
