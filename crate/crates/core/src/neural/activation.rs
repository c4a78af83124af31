/// Pointwise non-linearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// `(g(x), g'(x))`. The ReLU slope at exactly 0 is taken as 0.
    pub fn value_and_derivative(self, x: f64) -> (f64, f64) {
        let v = self.value(x);
        let d = match self {
            // e^-x / (e^-x + 1)^2 written through the value to avoid overflow.
            Activation::Sigmoid => v * (1.0 - v),
            // 4 e^{2x} / (e^{2x} + 1)^2 = 1 - tanh^2 x.
            Activation::Tanh => 1.0 - v * v,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        (v, d)
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sigmoid" => Some(Activation::Sigmoid),
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::Relu),
            _ => None,
        }
    }
}

/// Pass `value` through when `iscore > threshold`, else return zeros.
pub fn gamma_gate(value: &[f64], iscore: f64, threshold: f64) -> Vec<f64> {
    if iscore > threshold {
        value.to_vec()
    } else {
        vec![0.0; value.len()]
    }
}
