//! Binary checkpoint container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic "CRVNTCKP" | version u32 | layer count u32 | layer sizes u32...
//! fingerprint [32] | rng seed [32] | rng stream u64 | rng word position u128
//! simulations u64 | adam steps u64
//! theta f64... | adam m f64... | adam v f64... | target theta f64...
//! replay flag u8 [| capacity u64 | next u64 | len u64 | transitions...]
//! sha-256 of everything above [32]
//! ```

use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::geometry::BoundaryFlags;
use crate::rl::{ActionId, EnvState, QNetworkParams, ReplayBuffer, Transition, ACTION_COUNT, STATE_LEN};

const MAGIC: &[u8; 8] = b"CRVNTCKP";
const VERSION: u32 = 1;

/// Generator position, enough to resume a `ChaCha8Rng` exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self { seed: rng.get_seed(), stream: rng.get_stream(), word_pos: rng.get_word_pos() }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

/// Digest identifying the network interface a checkpoint was trained for.
pub fn shape_fingerprint(sizes: &[usize]) -> [u8; 32] {
    let text = format!(
        "q-network sizes={} state={STATE_LEN} actions={ACTION_COUNT} activation=relu",
        sizes.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
    );
    Sha256::digest(text.as_bytes()).into()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    /// Online network, including ADAM moments and step count.
    pub params: QNetworkParams,
    /// Weights of the target network.
    pub target_theta: Vec<f64>,
    pub replay: Option<ReplayBuffer>,
    pub rng: RngState,
    pub fingerprint: [u8; 32],
    /// Simulations run so far.
    pub simulations: u64,
}

impl Checkpoint {
    pub fn new(params: QNetworkParams, target_theta: Vec<f64>, replay: Option<ReplayBuffer>, rng: RngState, simulations: u64) -> Self {
        let fingerprint = shape_fingerprint(&params.sizes);
        Self { params, target_theta, replay, rng, fingerprint, simulations }
    }

    /// Rejects checkpoints whose shape or fingerprint differ from `sizes`.
    pub fn check_compatible(&self, sizes: &[usize]) -> Result<(), HarnessError> {
        if self.params.sizes != sizes || self.fingerprint != shape_fingerprint(sizes) {
            return Err(HarnessError::Incompatible(format!(
                "checkpoint network {:?} does not match expected {:?}",
                self.params.sizes, sizes
            )));
        }
        self.params.validate()?;
        if self.target_theta.len() != self.params.len() {
            return Err(HarnessError::Incompatible("target network size differs from online network".into()));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::new();
        w.extend_from_slice(MAGIC);
        w.extend_from_slice(&VERSION.to_le_bytes());
        w.extend_from_slice(&(self.params.sizes.len() as u32).to_le_bytes());
        for &s in &self.params.sizes {
            w.extend_from_slice(&(s as u32).to_le_bytes());
        }
        w.extend_from_slice(&self.fingerprint);
        w.extend_from_slice(&self.rng.seed);
        w.extend_from_slice(&self.rng.stream.to_le_bytes());
        w.extend_from_slice(&self.rng.word_pos.to_le_bytes());
        w.extend_from_slice(&self.simulations.to_le_bytes());
        w.extend_from_slice(&self.params.t.to_le_bytes());
        for block in [&self.params.theta, &self.params.m, &self.params.v, &self.target_theta] {
            for x in block.iter() {
                w.extend_from_slice(&x.to_le_bytes());
            }
        }
        match &self.replay {
            None => w.push(0),
            Some(buf) => {
                w.push(1);
                let items = buf.raw_items();
                w.extend_from_slice(&(buf.capacity() as u64).to_le_bytes());
                w.extend_from_slice(&(buf.next_slot() as u64).to_le_bytes());
                w.extend_from_slice(&(items.len() as u64).to_le_bytes());
                for t in items {
                    write_state(&mut w, &t.state);
                    w.push(t.action.index() as u8);
                    w.extend_from_slice(&t.reward.to_le_bytes());
                    write_state(&mut w, &t.next_state);
                    w.push(t.done as u8);
                }
            }
        }
        let digest = Sha256::digest(&w);
        w.extend_from_slice(&digest);
        w
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HarnessError> {
        if bytes.len() < MAGIC.len() + 32 {
            return Err(HarnessError::Corrupt("file too short".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(HarnessError::Corrupt("checksum mismatch".into()));
        }
        let mut r = Reader { bytes: body, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(HarnessError::Corrupt("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(HarnessError::Corrupt(format!("unsupported version {version}")));
        }
        let layers = r.u32()? as usize;
        if !(2..=16).contains(&layers) {
            return Err(HarnessError::Corrupt(format!("implausible layer count {layers}")));
        }
        let sizes: Vec<usize> = (0..layers).map(|_| r.u32().map(|s| s as usize)).collect::<Result<_, _>>()?;
        let fingerprint: [u8; 32] = r.take(32)?.try_into().unwrap();
        let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
        let stream = r.u64()?;
        let word_pos = u128::from_le_bytes(r.take(16)?.try_into().unwrap());
        let simulations = r.u64()?;
        let t = r.u64()?;
        let n = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum::<usize>();
        let mut blocks = Vec::with_capacity(4);
        for _ in 0..4 {
            blocks.push((0..n).map(|_| r.f64()).collect::<Result<Vec<f64>, _>>()?);
        }
        let target_theta = blocks.pop().unwrap();
        let v = blocks.pop().unwrap();
        let m = blocks.pop().unwrap();
        let theta = blocks.pop().unwrap();
        let replay = match r.take(1)?[0] {
            0 => None,
            1 => {
                let capacity = r.u64()? as usize;
                let next = r.u64()? as usize;
                let len = r.u64()? as usize;
                if len > capacity || len > body.len() {
                    return Err(HarnessError::Corrupt("replay length exceeds capacity".into()));
                }
                let mut items = Vec::with_capacity(len);
                for _ in 0..len {
                    let state = r.state()?;
                    let action = ActionId::new(r.take(1)?[0] as usize)
                        .ok_or_else(|| HarnessError::Corrupt("action id out of range".into()))?;
                    let reward = r.f64()?;
                    let next_state = r.state()?;
                    let done = r.take(1)?[0] != 0;
                    items.push(Transition { state, action, reward, next_state, done });
                }
                Some(ReplayBuffer::from_parts(capacity, items, next).map_err(|e| HarnessError::Corrupt(e.to_string()))?)
            }
            other => return Err(HarnessError::Corrupt(format!("bad replay flag {other}"))),
        };
        if r.pos != body.len() {
            return Err(HarnessError::Corrupt("trailing bytes".into()));
        }
        Ok(Self {
            params: QNetworkParams { sizes, theta, m, v, t },
            target_theta,
            replay,
            rng: RngState { seed, stream, word_pos },
            fingerprint,
            simulations,
        })
    }
}

fn write_state(w: &mut Vec<u8>, s: &EnvState) {
    for x in s.normalized {
        w.extend_from_slice(&x.to_le_bytes());
    }
    for f in s.flags.0 {
        w.push(f as u8);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], HarnessError> {
        if self.bytes.len() - self.pos < n {
            return Err(HarnessError::Corrupt("unexpected end of data".into()));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, HarnessError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, HarnessError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, HarnessError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn state(&mut self) -> Result<EnvState, HarnessError> {
        let mut normalized = [0.0; 5];
        for x in normalized.iter_mut() {
            *x = self.f64()?;
        }
        let mut flags = [false; 10];
        for f in flags.iter_mut() {
            *f = self.take(1)?[0] != 0;
        }
        Ok(EnvState { normalized, flags: BoundaryFlags(flags) })
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, ckpt.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, HarnessError> {
    Checkpoint::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DesignBounds;
    use crate::rl::{env_reset, LAYER_SIZES};
    use rand::Rng;

    fn sample(with_replay: bool) -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let params = QNetworkParams::init(&LAYER_SIZES, &mut rng);
        let target = params.theta.iter().map(|x| x * 0.5).collect();
        let replay = with_replay.then(|| {
            let mut buf = ReplayBuffer::new(4).unwrap();
            let bounds = DesignBounds::default();
            for i in 0..6 {
                buf.push(Transition {
                    state: env_reset(&bounds, &mut rng).1,
                    action: ActionId::new(i % ACTION_COUNT).unwrap(),
                    reward: -1.0,
                    next_state: env_reset(&bounds, &mut rng).1,
                    done: i == 5,
                });
            }
            buf
        });
        let _: u64 = rng.gen();
        Checkpoint::new(params, target, replay, RngState::capture(&rng), 123)
    }

    #[test]
    fn round_trip_is_exact() {
        for with_replay in [false, true] {
            let ckpt = sample(with_replay);
            let back = Checkpoint::from_bytes(&ckpt.to_bytes()).unwrap();
            assert_eq!(back.to_bytes(), ckpt.to_bytes());
            assert_eq!(back.params.theta.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                ckpt.params.theta.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
            assert_eq!(back.rng, ckpt.rng);
            assert_eq!(back.replay, ckpt.replay);
        }
    }

    #[test]
    fn rng_resumes_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..37 {
            let _: u32 = rng.gen();
        }
        let mut resumed = RngState::capture(&rng).restore();
        let a: Vec<u64> = (0..8).map(|_| rng.gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| resumed.gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_file_fails_checksum() {
        let bytes = sample(false).to_bytes();
        for cut in [1, 100, bytes.len() / 2] {
            let err = Checkpoint::from_bytes(&bytes[..bytes.len() - cut]).unwrap_err();
            assert!(matches!(err, HarnessError::Corrupt(_)), "{err}");
        }
    }

    #[test]
    fn flipped_bit_fails_checksum() {
        let mut bytes = sample(false).to_bytes();
        bytes[200] ^= 1;
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(HarnessError::Corrupt(_))));
    }

    #[test]
    fn mismatched_shape_rejected() {
        let ckpt = sample(false);
        assert!(ckpt.check_compatible(&LAYER_SIZES).is_ok());
        assert!(matches!(ckpt.check_compatible(&[15, 64, 64, 11]), Err(HarnessError::Incompatible(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.ckpt");
        let ckpt = sample(true);
        save_checkpoint(&ckpt, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), ckpt);
    }
}
