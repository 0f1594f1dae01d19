// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::path::PathBuf;

use she_core::dataset::{read_images, read_labels, Images};
use she_core::netcompile::{compile, fold_batchnorm, input_words, parse_model, EvaluationPlan, ModelSpec};
use she_core::{DepthBudget, GateCostModel, PlainWord};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub struct Fixture {
    pub raw: ModelSpec,
    pub folded: ModelSpec,
    pub plan: EvaluationPlan,
}

pub fn load_model(file: &str) -> Fixture {
    let raw = parse_model(&std::fs::read(fixture(file)).unwrap()).unwrap();
    let folded = fold_batchnorm(&raw).unwrap();
    let plan = compile(&folded, &GateCostModel::default(), DepthBudget::default()).unwrap();
    Fixture { raw, folded, plan }
}

pub fn test_set() -> (Images, Vec<u8>) {
    let (images, _) = read_images(&fixture("mnist-test-images.idx3-ubyte"), 28, 28).unwrap();
    let labels = read_labels(&fixture("mnist-test-labels.idx1-ubyte")).unwrap();
    (images, labels)
}

pub fn words(plan: &EvaluationPlan, images: &Images, i: usize) -> Vec<PlainWord> {
    input_words(plan, &images.image_f64(i))
}
