//! Built-in example masks.
//!
//! Two ready-made systems ship with the crate, selectable on the CLI by the
//! ids `5.1` (scalar, dilation 2, approximation order 2) and `5.2`
//! (multiplicity 2, dilation 2). Coefficients are stored as exact surd
//! expression strings, so the embedded text doubles as a mask-file example.

use crate::mask::{self, CoeffSeq, TwoDirectionSystem};

/// Scalar system of approximation order 2 with supports `{1..4}` / `{4..7}`.
pub const EXAMPLE_5_1: &str = r#"{
  "name": "example-5.1",
  "dilation": 2,
  "multiplicity": 1,
  "phi": {
    "plus": {
      "1": [["(93-13*sqrt(31))/(320*sqrt(2))"]],
      "2": [["(341-11*sqrt(31))/(320*sqrt(2))"]],
      "3": [["(11-11*sqrt(31))/(320*sqrt(2))"]],
      "4": [["(-13+3*sqrt(31))/(320*sqrt(2))"]]
    },
    "minus": {
      "4": [["(-31+sqrt(31))/(320*sqrt(2))"]],
      "5": [["(217+23*sqrt(31))/(320*sqrt(2))"]],
      "6": [["(23+7*sqrt(31))/(320*sqrt(2))"]],
      "7": [["(-1+sqrt(31))/(320*sqrt(2))"]]
    }
  },
  "psi": [
    {
      "plus": {
        "1": [["(11-sqrt(31))/(80*sqrt(2))"]],
        "2": [["(57+3*sqrt(31))/(80*sqrt(2))"]],
        "3": [["(-91+sqrt(31))/(80*sqrt(2))"]],
        "4": [["(23-3*sqrt(31))/(80*sqrt(2))"]]
      },
      "minus": {
        "4": [["(23-3*sqrt(31))/(80*sqrt(2))"]],
        "5": [["(-91+sqrt(31))/(80*sqrt(2))"]],
        "6": [["(57+3*sqrt(31))/(80*sqrt(2))"]],
        "7": [["(11-sqrt(31))/(80*sqrt(2))"]]
      }
    }
  ]
}
"#;

/// Multiplicity-2 system with supports `{1,2}` / `{2,3}`.
pub const EXAMPLE_5_2: &str = r#"{
  "name": "example-5.2",
  "dilation": 2,
  "multiplicity": 2,
  "phi": {
    "plus": {
      "1": [["6/(8*sqrt(2))", 0],
            ["(-2*sqrt(3)+sqrt(21))/(8*sqrt(2))", "3/(8*sqrt(2))"]],
      "2": [["(4-2*sqrt(7))/(8*sqrt(2))", 0],
            ["3*sqrt(3)/(8*sqrt(2))", "(2-sqrt(7))/(8*sqrt(2))"]]
    },
    "minus": {
      "2": [["(4+2*sqrt(7))/(8*sqrt(2))", 0],
            ["sqrt(3)/(8*sqrt(2))", "(2+sqrt(7))/(8*sqrt(2))"]],
      "3": [["2/(8*sqrt(2))", 0],
            ["(-2*sqrt(3)-sqrt(21))/(8*sqrt(2))", "1/(8*sqrt(2))"]]
    }
  },
  "psi": [
    {
      "plus": {
        "1": [[0, "(-4+2*sqrt(7))/(8*sqrt(2))"],
              ["(-2+sqrt(7))/(8*sqrt(2))", "-3*sqrt(3)/(8*sqrt(2))"]],
        "2": [[0, "6/(8*sqrt(2))"],
              ["3/(8*sqrt(2))", "(-2*sqrt(3)+sqrt(21))/(8*sqrt(2))"]]
      },
      "minus": {
        "2": [[0, "2/(8*sqrt(2))"],
              ["1/(8*sqrt(2))", "(-2*sqrt(3)-sqrt(21))/(8*sqrt(2))"]],
        "3": [[0, "(-4-2*sqrt(7))/(8*sqrt(2))"],
              ["(-2-sqrt(7))/(8*sqrt(2))", "-sqrt(3)/(8*sqrt(2))"]]
      }
    }
  ]
}
"#;

/// Mask-file text for a builtin id (`"5.1"`, `"example-5.1"`, ...).
pub fn builtin(id: &str) -> Option<&'static str> {
    match id {
        "5.1" | "example-5.1" => Some(EXAMPLE_5_1),
        "5.2" | "example-5.2" => Some(EXAMPLE_5_2),
        _ => None,
    }
}

/// Ids accepted by [`builtin`], one per fixture.
pub fn builtin_ids() -> &'static [&'static str] {
    &["5.1", "5.2"]
}

pub fn system_5_1() -> TwoDirectionSystem {
    mask::parse_system(EXAMPLE_5_1).expect("builtin mask 5.1 is valid")
}

pub fn system_5_2() -> TwoDirectionSystem {
    mask::parse_system(EXAMPLE_5_2).expect("builtin mask 5.2 is valid")
}

/// Hat function written as a two-direction system: `P_k^+ = P_k^- = h_k / 2`
/// on `k in {-1, 0, 1}`, where `h` is the one-direction hat mask. Since the
/// hat is even, it satisfies the two-direction refinement equation exactly.
pub fn symmetric_hat() -> TwoDirectionSystem {
    let s = 1.0 / std::f64::consts::SQRT_2;
    let half = [(-1, 0.25 * s), (0, 0.5 * s), (1, 0.25 * s)];
    let plus = CoeffSeq::scalar(half);
    let minus = CoeffSeq::scalar(half);
    TwoDirectionSystem::new("symmetric-hat", 2, 1, plus, minus, vec![])
        .expect("hat system is valid")
}
