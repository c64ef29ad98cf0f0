//! Left-to-right feature extraction and the averaged perceptron.

mod features;
mod perceptron;

pub use features::{
    extract_features_deprel, extract_features_pos, extract_features_sl, extract_features_tb,
    FeatureVector, History, SentenceView,
};
pub use perceptron::{train, Instance, Model, TrainReport, TrainingSet};
