//! Little-endian binary encoding for model files.
//!
//! ```text
//! file     magic "LFMODEL" + version byte (1), kind u8 (1 = mlp, 2 = cascade), body
//! string   u16 byte length, UTF-8
//! f64 vec  u32 length, f64 values
//! mlp      seed u64, layout (u32 count, strings), scaler (mean vec, scale vec),
//!          layers (u32 count; each: u32 inputs, u32 outputs, u8 activation,
//!          weights f64 x inputs*outputs, bias f64 x outputs),
//!          meta (u32 epochs, u32 best_epoch, f64 final_lr, f64 holdout_accuracy,
//!          train-loss vec, holdout-loss vec)
//! cascade  thresholds 3 x f64 (stage1, stage2, high-confidence),
//!          feature layout (u32 embedding_dim, u32 count, vocab strings),
//!          stage-1 mlp, stage-2 mlp
//! ```

use super::ModelError;

pub(crate) const MAGIC: &[u8; 8] = b"LFMODEL\x01";
pub(crate) const KIND_MLP: u8 = 1;
pub(crate) const KIND_CASCADE: u8 = 2;

#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }
    pub fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    pub fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    pub fn f64(&mut self, x: f64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    pub fn str(&mut self, s: &str) {
        self.buf.extend_from_slice(&(s.len() as u16).to_le_bytes());
        self.buf.extend_from_slice(s.as_bytes());
    }
    pub fn f64s(&mut self, xs: &[f64]) {
        self.u32(xs.len() as u32);
        for &x in xs {
            self.f64(x);
        }
    }
    pub fn strs(&mut self, xs: &[String]) {
        self.u32(xs.len() as u32);
        for x in xs {
            self.str(x);
        }
    }
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn truncated() -> ModelError {
    ModelError::Format("truncated model file".into())
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let s = self.bytes.get(self.pos..self.pos + n).ok_or_else(truncated)?;
        self.pos += n;
        Ok(s)
    }
    pub fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }
    pub fn u16(&mut self) -> Result<u16, ModelError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    pub fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    pub fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn f64(&mut self) -> Result<f64, ModelError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn str(&mut self) -> Result<String, ModelError> {
        let n = self.u16()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| ModelError::Format("string is not UTF-8".into()))
    }
    pub fn f64s(&mut self) -> Result<Vec<f64>, ModelError> {
        let n = self.u32()? as usize;
        (0..n).map(|_| self.f64()).collect()
    }
    pub fn f64s_exact(&mut self, n: usize) -> Result<Vec<f64>, ModelError> {
        (0..n).map(|_| self.f64()).collect()
    }
    pub fn strs(&mut self) -> Result<Vec<String>, ModelError> {
        let n = self.u32()? as usize;
        (0..n).map(|_| self.str()).collect()
    }
    pub fn header(&mut self, kind: u8) -> Result<(), ModelError> {
        if self.take(8)? != MAGIC {
            return Err(ModelError::Format("bad magic or unsupported version".into()));
        }
        let k = self.u8()?;
        if k != kind {
            return Err(ModelError::Format(format!("expected model kind {kind}, found {k}")));
        }
        Ok(())
    }
    pub fn finish(&self) -> Result<(), ModelError> {
        if self.pos != self.bytes.len() {
            return Err(ModelError::Format("trailing bytes after model".into()));
        }
        Ok(())
    }
}
