use std::fmt;

use crate::signalgen::SignalClass;

/// 4×4 classification counts, rows = true class, columns = predicted class.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, truth: SignalClass, predicted: SignalClass) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, truth: SignalClass) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..4).map(|i| self.counts[i][i]).sum()
    }

    /// Fraction of all samples on the diagonal; `None` when empty.
    pub fn overall_accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.correct() as f64 / total as f64)
    }

    /// Recall per true class; `None` for classes with no samples.
    pub fn per_class_accuracy(&self) -> [Option<f64>; 4] {
        SignalClass::ALL.map(|c| {
            let n = self.row_total(c);
            (n > 0).then(|| self.counts[c.index()][c.index()] as f64 / n as f64)
        })
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    /// `truth,Idle,U_D,U_I,U_D+U_I` header then one row per true class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth");
        for c in SignalClass::ALL {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for c in SignalClass::ALL {
            out.push_str(c.name());
            for n in self.counts[c.index()] {
                out.push_str(&format!(",{n}"));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>10}", "true\\pred")?;
        for c in SignalClass::ALL {
            write!(f, "{:>10}", c.name())?;
        }
        writeln!(f, "{:>10}", "acc")?;
        let acc = self.per_class_accuracy();
        for c in SignalClass::ALL {
            write!(f, "{:>10}", c.name())?;
            for n in self.counts[c.index()] {
                write!(f, "{n:>10}")?;
            }
            match acc[c.index()] {
                Some(a) => writeln!(f, "{:>9.2}%", 100.0 * a)?,
                None => writeln!(f, "{:>10}", "-")?,
            }
        }
        if let Some(a) = self.overall_accuracy() {
            write!(f, "overall accuracy {:.2}%", 100.0 * a)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracies() {
        let mut cm = ConfusionMatrix::new();
        assert_eq!(cm.overall_accuracy(), None);
        cm.record(SignalClass::Idle, SignalClass::Idle);
        cm.record(SignalClass::Both, SignalClass::DOnly);
        cm.record(SignalClass::Both, SignalClass::Both);
        assert_eq!(cm.total(), 3);
        assert_eq!(cm.overall_accuracy(), Some(2.0 / 3.0));
        let acc = cm.per_class_accuracy();
        assert_eq!(acc[0], Some(1.0));
        assert_eq!(acc[1], None);
        assert_eq!(acc[3], Some(0.5));
        assert_eq!(cm.row_total(SignalClass::Both), 2);
        assert!(cm.to_csv().starts_with("truth,Idle,U_D,U_I,U_D+U_I\nIdle,1,0,0,0\n"));
    }
}
