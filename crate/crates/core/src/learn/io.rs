//! Binary model files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic      5 bytes  "OFFD1"
//! version    u16      1
//! kind       u8       1 = rlsc, 2 = svm, 3 = logreg, 4 = gnb
//! hyper      rlsc:    f64 lambda
//!            svm:     f64 C, u64 epochs, u64 seed
//!            logreg:  f64 lr, u64 epochs, f64 l2, u64 seed
//!            gnb:     f64 var_floor
//! dim        u64
//! body       linear:  f64[dim] weights, f64 bias
//!            gnb:     f64 prior_off, f64 prior_not,
//!                     f64[dim] mean_off, f64[dim] var_off,
//!                     f64[dim] mean_not, f64[dim] var_not
//! has_rks    u8       0 or 1
//! rks        u16 name length, name bytes (PRNG algorithm),
//!            u64 seed, f64 sigma, u64 input_dim, u64 frequencies,
//!            f64[frequencies * input_dim] omega, row-major by frequency
//! ```
//!
//! Nothing may follow the last field.

use std::io::{ErrorKind, Read, Write};

use super::{GnbModel, LinearHyper, LinearModel, Model};
use crate::error::{Error, Result};
use crate::rks::{RksMap, PRNG_ALGORITHM};

pub const MODEL_MAGIC: &[u8; 5] = b"OFFD1";
pub const MODEL_VERSION: u16 = 1;

/// Guards allocations when reading lengths from untrusted files.
const MAX_ELEMENTS: u64 = 1 << 30;

const KIND_RLSC: u8 = 1;
const KIND_SVM: u8 = 2;
const KIND_LOGREG: u8 = 3;
const KIND_GNB: u8 = 4;

pub fn save_model<W: Write>(model: &Model, mut sink: W) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    match model {
        Model::Linear(m) => {
            match m.hyper {
                LinearHyper::Rlsc { lambda } => {
                    buf.push(KIND_RLSC);
                    put_f64(&mut buf, lambda);
                }
                LinearHyper::Svm { c, epochs, seed } => {
                    buf.push(KIND_SVM);
                    put_f64(&mut buf, c);
                    put_u64(&mut buf, epochs as u64);
                    put_u64(&mut buf, seed);
                }
                LinearHyper::Logreg {
                    lr,
                    epochs,
                    l2,
                    seed,
                } => {
                    buf.push(KIND_LOGREG);
                    put_f64(&mut buf, lr);
                    put_u64(&mut buf, epochs as u64);
                    put_f64(&mut buf, l2);
                    put_u64(&mut buf, seed);
                }
            }
            put_u64(&mut buf, m.weights.len() as u64);
            m.weights.iter().for_each(|w| put_f64(&mut buf, *w));
            put_f64(&mut buf, m.bias);
        }
        Model::Gnb(m) => {
            buf.push(KIND_GNB);
            put_f64(&mut buf, m.var_floor);
            put_u64(&mut buf, m.dim() as u64);
            put_f64(&mut buf, m.priors[0]);
            put_f64(&mut buf, m.priors[1]);
            for c in 0..2 {
                m.means[c].iter().for_each(|v| put_f64(&mut buf, *v));
                m.variances[c].iter().for_each(|v| put_f64(&mut buf, *v));
            }
        }
    }
    match model.rks() {
        None => buf.push(0),
        Some(map) => {
            buf.push(1);
            let name = PRNG_ALGORITHM.as_bytes();
            buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
            buf.extend_from_slice(name);
            put_u64(&mut buf, map.seed());
            put_f64(&mut buf, map.sigma());
            put_u64(&mut buf, map.input_dim() as u64);
            put_u64(&mut buf, map.frequencies() as u64);
            map.omega().iter().for_each(|w| put_f64(&mut buf, *w));
        }
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

pub fn load_model<R: Read>(source: R) -> Result<Model> {
    let mut r = Reader(source);
    let mut magic = [0u8; 5];
    r.exact(&mut magic)?;
    if &magic != MODEL_MAGIC {
        return Err(Error::ModelFormat("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let kind = r.u8()?;
    let model = match kind {
        KIND_RLSC | KIND_SVM | KIND_LOGREG => {
            let hyper = match kind {
                KIND_RLSC => LinearHyper::Rlsc { lambda: r.f64()? },
                KIND_SVM => LinearHyper::Svm {
                    c: r.f64()?,
                    epochs: r.usize()?,
                    seed: r.u64()?,
                },
                _ => LinearHyper::Logreg {
                    lr: r.f64()?,
                    epochs: r.usize()?,
                    l2: r.f64()?,
                    seed: r.u64()?,
                },
            };
            let dim = r.len()?;
            let weights = r.f64s(dim)?;
            let bias = r.f64()?;
            Model::Linear(LinearModel {
                weights,
                bias,
                hyper,
                rks: None,
            })
        }
        KIND_GNB => {
            let var_floor = r.f64()?;
            let dim = r.len()?;
            let priors = [r.f64()?, r.f64()?];
            let mean_off = r.f64s(dim)?;
            let var_off = r.f64s(dim)?;
            let mean_not = r.f64s(dim)?;
            let var_not = r.f64s(dim)?;
            Model::Gnb(GnbModel {
                priors,
                means: [mean_off, mean_not],
                variances: [var_off, var_not],
                var_floor,
                rks: None,
            })
        }
        other => return Err(Error::ModelFormat(format!("unknown model kind {other}"))),
    };

    let rks = match r.u8()? {
        0 => None,
        1 => {
            let name_len = u16::from_le_bytes(r.array()?) as usize;
            let mut name = vec![0u8; name_len];
            r.exact(&mut name)?;
            if name != PRNG_ALGORITHM.as_bytes() {
                return Err(Error::ModelFormat(format!(
                    "unknown PRNG algorithm `{}`",
                    String::from_utf8_lossy(&name)
                )));
            }
            let seed = r.u64()?;
            let sigma = r.f64()?;
            let input_dim = r.len()?;
            let frequencies = r.len()?;
            let count = input_dim
                .checked_mul(frequencies)
                .filter(|c| (*c as u64) <= MAX_ELEMENTS)
                .ok_or_else(|| Error::ModelFormat("frequency matrix too large".into()))?;
            let omega = r.f64s(count)?;
            Some(
                RksMap::from_parts(input_dim, frequencies, sigma, seed, omega)
                    .map_err(|e| Error::ModelFormat(e.to_string()))?,
            )
        }
        flag => return Err(Error::ModelFormat(format!("bad map flag {flag}"))),
    };

    let mut extra = [0u8; 1];
    match r.0.read(&mut extra) {
        Ok(0) => {}
        Ok(_) => return Err(Error::ModelFormat("trailing bytes".into())),
        Err(e) => return Err(e.into()),
    }
    let model = model.with_rks(rks);
    if let Some(map) = model.rks() {
        let scored = match &model {
            Model::Linear(m) => m.weights.len(),
            Model::Gnb(m) => m.dim(),
        };
        if scored != map.output_dim() {
            return Err(Error::ModelFormat(
                "map output dimension does not match classifier".into(),
            ));
        }
    }
    Ok(model)
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct Reader<R>(R);

impl<R: Read> Reader<R> {
    fn exact(&mut self, buf: &mut [u8]) -> Result<()> {
        self.0.read_exact(buf).map_err(|e| {
            if e.kind() == ErrorKind::UnexpectedEof {
                Error::ModelFormat("truncated model file".into())
            } else {
                e.into()
            }
        })
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.exact(&mut b)?;
        Ok(b)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::ModelFormat("value out of range".into()))
    }

    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        if v > MAX_ELEMENTS {
            return Err(Error::ModelFormat(format!("implausible length {v}")));
        }
        Ok(v as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rlsc() -> Model {
        Model::Linear(LinearModel {
            weights: vec![0.5, -1.25, 3.0],
            bias: 0.125,
            hyper: LinearHyper::Rlsc { lambda: 1e-3 },
            rks: None,
        })
    }

    fn bytes(m: &Model) -> Vec<u8> {
        let mut out = Vec::new();
        save_model(m, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_linear() {
        let m = rlsc();
        assert_eq!(load_model(&bytes(&m)[..]).unwrap(), m);
    }

    #[test]
    fn round_trip_with_map() {
        let map = RksMap::sample(4, 6, 0.7, 21).unwrap();
        let m = Model::Linear(LinearModel {
            weights: vec![0.1; 6],
            bias: -0.2,
            hyper: LinearHyper::Svm {
                c: 1000.0,
                epochs: 7,
                seed: 3,
            },
            rks: Some(map.clone()),
        });
        let back = load_model(&bytes(&m)[..]).unwrap();
        assert_eq!(back.rks().unwrap().omega(), map.omega());
        assert_eq!(back, m);
    }

    #[test]
    fn header_corruption_rejected() {
        let good = bytes(&rlsc());
        for i in 0..7 {
            let mut bad = good.clone();
            bad[i] ^= 0x5a;
            assert!(matches!(load_model(&bad[..]), Err(Error::ModelFormat(_))), "byte {i}");
        }
    }

    #[test]
    fn truncation_rejected() {
        let good = bytes(&rlsc());
        for cut in [0, 4, 8, good.len() - 1] {
            assert!(load_model(&good[..cut]).is_err());
        }
        let mut long = good.clone();
        long.push(0);
        assert!(load_model(&long[..]).is_err());
    }
}
