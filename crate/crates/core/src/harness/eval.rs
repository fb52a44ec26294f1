use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::neuralnet::{self, argmax, CnnModel};
use crate::scalar::Scalar;
use crate::signalgen::{IqWindow, SignalClass};

/// Anything that maps a window to a posterior over the four classes.
pub trait Classifier {
    fn posterior(&self, window: &IqWindow<f32>) -> Result<[f64; 4]>;

    fn confusion(&self, test: &LabeledDataset) -> Result<ConfusionMatrix> {
        let mut cm = ConfusionMatrix::new();
        for w in test.windows() {
            let truth = w.label.ok_or(Error::MissingLabel)?;
            let p = self.posterior(w)?;
            cm.record(truth, SignalClass::ALL[argmax(&p)]);
        }
        Ok(cm)
    }
}

impl<T: Scalar> Classifier for CnnModel<T> {
    fn posterior(&self, window: &IqWindow<f32>) -> Result<[f64; 4]> {
        Ok(self.predict(window)?.map(|p| p.as_f64()))
    }

    fn confusion(&self, test: &LabeledDataset) -> Result<ConfusionMatrix> {
        neuralnet::evaluate(self, test)
    }
}

/// Reads the answer off the window's label.
#[derive(Clone, Copy, Debug, Default)]
pub struct TruthClassifier;

impl Classifier for TruthClassifier {
    fn posterior(&self, window: &IqWindow<f32>) -> Result<[f64; 4]> {
        let mut p = [0.0; 4];
        p[window.label.ok_or(Error::MissingLabel)?.index()] = 1.0;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierEval {
    pub confusion: ConfusionMatrix,
    pub per_class_accuracy: [Option<f64>; 4],
    pub overall_accuracy: f64,
}

pub fn eval_classifier<C: Classifier + ?Sized>(classifier: &C, test: &LabeledDataset) -> Result<ClassifierEval> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let confusion = classifier.confusion(test)?;
    Ok(ClassifierEval {
        per_class_accuracy: confusion.per_class_accuracy(),
        overall_accuracy: confusion.overall_accuracy().expect("non-empty"),
        confusion,
    })
}
