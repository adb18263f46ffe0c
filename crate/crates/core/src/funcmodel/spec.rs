//! JSON function specs, e.g.
//!
//! ```json
//! {"kind": "poly", "coeffs": [0, 0, 1], "domain": [0, 1]}
//! {"kind": "pwl", "points": [[0, 0], ["1/2", 1], [1, 0]]}
//! {"kind": "neg", "inner": {"kind": "counterexample"}}
//! ```
//!
//! Numbers may be given as JSON numbers or as exact `"p/q"` strings.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::funcmodel::cantor::{parse_rational, to_f64, DEFAULT_DEPTH_CAP};
use crate::funcmodel::{
    Counterexample, FunctionModel, Interval, PiecewiseLinear, Polynomial, ScaledPower,
};

/// A real number read from a JSON number or a `"p/q"` string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Real(x)),
            Raw::Text(s) => parse_rational(&s)
                .map(|q| Real(to_f64(&q)))
                .map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

fn interval(d: [Real; 2]) -> Result<Interval> {
    Interval::new(d[0].0, d[1].0).map_err(|e| Error::Spec(e.to_string()))
}

fn to_pair(i: Interval) -> [Real; 2] {
    [Real(i.lo()), Real(i.hi())]
}

/// Serialized form of a [`FunctionModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Pwl {
        points: Vec<[Real; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<[Real; 2]>,
    },
    Poly {
        coeffs: Vec<Real>,
        domain: [Real; 2],
    },
    Power {
        c: Real,
        x0: Real,
        p: Real,
        #[serde(default)]
        odd: bool,
        domain: [Real; 2],
    },
    Counterexample {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth_cap: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<[Real; 2]>,
    },
    Neg {
        inner: Box<FunctionSpec>,
    },
    Reflect {
        inner: Box<FunctionSpec>,
    },
}

impl FunctionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("function specs always serialize")
    }

    pub fn build(&self) -> Result<FunctionModel> {
        let spec_err = |e: Error| Error::Spec(e.to_string());
        Ok(match self {
            FunctionSpec::Pwl { points, domain } => {
                let pts: Vec<(f64, f64)> = points.iter().map(|[x, y]| (x.0, y.0)).collect();
                let mut f = PiecewiseLinear::new(&pts).map_err(spec_err)?;
                if let Some(d) = domain {
                    f = f.with_domain(interval(*d)?).map_err(spec_err)?;
                }
                f.into()
            }
            FunctionSpec::Poly { coeffs, domain } => {
                let coeffs = coeffs.iter().map(|c| c.0).collect();
                Polynomial::new(coeffs, interval(*domain)?).map_err(spec_err)?.into()
            }
            FunctionSpec::Power { c, x0, p, odd, domain } => {
                ScaledPower::new(c.0, x0.0, p.0, *odd, interval(*domain)?)
                    .map_err(spec_err)?
                    .into()
            }
            FunctionSpec::Counterexample { depth_cap, domain } => {
                let mut f = Counterexample::new(depth_cap.unwrap_or(DEFAULT_DEPTH_CAP))
                    .map_err(spec_err)?;
                if let Some(d) = domain {
                    f = f.with_domain(interval(*d)?).map_err(spec_err)?;
                }
                f.into()
            }
            FunctionSpec::Neg { inner } => inner.build()?.negated(),
            FunctionSpec::Reflect { inner } => inner.build()?.reflected(),
        })
    }
}

impl From<&FunctionModel> for FunctionSpec {
    fn from(f: &FunctionModel) -> Self {
        match f {
            FunctionModel::PiecewiseLinear(p) => {
                let points: Vec<[Real; 2]> = p.nodes().map(|(x, y)| [Real(x), Real(y)]).collect();
                let node_range = (points[0][0].0, points[points.len() - 1][0].0);
                let d = f.domain();
                let domain = ((d.lo(), d.hi()) != node_range).then(|| to_pair(d));
                FunctionSpec::Pwl { points, domain }
            }
            FunctionModel::Polynomial(p) => FunctionSpec::Poly {
                coeffs: p.coeffs().iter().map(|&c| Real(c)).collect(),
                domain: to_pair(f.domain()),
            },
            FunctionModel::ScaledPower(p) => FunctionSpec::Power {
                c: Real(p.c),
                x0: Real(p.x0),
                p: Real(p.p),
                odd: p.odd,
                domain: to_pair(f.domain()),
            },
            FunctionModel::Counterexample(c) => FunctionSpec::Counterexample {
                depth_cap: Some(c.depth()),
                domain: (c.domain() != Interval::new_unchecked(0.0, 1.0))
                    .then(|| to_pair(c.domain())),
            },
            FunctionModel::Negation(inner) => {
                FunctionSpec::Neg { inner: Box::new(inner.as_ref().into()) }
            }
            FunctionModel::Reflection(inner) => {
                FunctionSpec::Reflect { inner: Box::new(inner.as_ref().into()) }
            }
        }
    }
}

impl FunctionModel {
    /// Parses and builds a model from its JSON spec.
    pub fn from_json(text: &str) -> Result<Self> {
        FunctionSpec::from_json(text)?.build()
    }

    pub fn to_json(&self) -> String {
        FunctionSpec::from(self).to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let cases = [
            r#"{"kind":"pwl","points":[[0,0],["1/2",1],[1,0]]}"#,
            r#"{"kind":"poly","coeffs":[0,0,1],"domain":[0,1]}"#,
            r#"{"kind":"power","c":1,"x0":"1/2","p":1,"domain":[0,1]}"#,
            r#"{"kind":"counterexample"}"#,
            r#"{"kind":"counterexample","depth_cap":30,"domain":[-1,2]}"#,
            r#"{"kind":"neg","inner":{"kind":"poly","coeffs":[1],"domain":[0,1]}}"#,
            r#"{"kind":"reflect","inner":{"kind":"poly","coeffs":[0,1],"domain":[0,1]}}"#,
        ];
        for text in cases {
            let f = FunctionModel::from_json(text).unwrap_or_else(|e| panic!("{text}: {e}"));
            let again = FunctionModel::from_json(&f.to_json()).unwrap();
            assert_eq!(FunctionSpec::from(&f), FunctionSpec::from(&again));
        }
        let pwl = FunctionModel::from_json(cases[0]).unwrap();
        assert_eq!(pwl.eval(0.25).unwrap(), 0.5);
        let refl = FunctionModel::from_json(cases[6]).unwrap();
        assert_eq!(refl.domain(), Interval::new(-1.0, 0.0).unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            r#"{"kind":"poly","coeffs":[1],"domain":[0,1],"extra":3}"#,
            r#"{"kind":"poly","coeffs":[1],"domain":[1,0]}"#,
            r#"{"kind":"pwl","points":[[1,0],[0,1]]}"#,
            r#"{"kind":"spline","knots":[]}"#,
            r#"{"kind":"counterexample","domain":[0.2,1]}"#,
            r#"{"kind":"counterexample","depth_cap":0}"#,
            r#"{"kind":"poly","coeffs":["1/0"],"domain":[0,1]}"#,
            r#"not json"#,
        ];
        for text in bad {
            assert!(
                matches!(FunctionModel::from_json(text), Err(Error::Spec(_))),
                "accepted {text}"
            );
        }
    }
}
