//! Binary serialization of [`ChannelSampleSet`].
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "IRSS"
//! 4       1     format version (1)
//! 5       3     reserved, zero
//! 8       4     M (u32)
//! 12      4     N (u32)
//! 16      4     T (u32)
//! 20      1     seed present (0 or 1)
//! 21      8     seed (u64, zero when absent)
//! 29      104   geometry: bs xyz, irs xyz, user-region center xyz,
//!               user-region side, beta direct, beta bs-irs, beta irs-user (13 x f64)
//! 133     24    user position xyz (3 x f64)
//! 157     ...   T samples, each h_d (M), G (N x M row-major), h_r (N),
//!               every complex entry stored as (re f64, im f64)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::channel::{
    ChannelSample, ChannelSampleSet, Position3D, SampleSetMeta, ScenarioGeometry,
};
use crate::error::{OutageError, Result};

pub const MAGIC: [u8; 4] = *b"IRSS";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 157;

fn put_f64(buf: &mut Vec<u8>, x: f64) {
    buf.extend_from_slice(&x.to_le_bytes());
}

fn put_pos(buf: &mut Vec<u8>, p: &Position3D) {
    put_f64(buf, p.x);
    put_f64(buf, p.y);
    put_f64(buf, p.z);
}

fn put_complex(buf: &mut Vec<u8>, zs: &[Complex64]) {
    for z in zs {
        put_f64(buf, z.re);
        put_f64(buf, z.im);
    }
}

pub fn encode(set: &ChannelSampleSet) -> Result<Vec<u8>> {
    let dim = |x: usize, name: &str| {
        u32::try_from(x).map_err(|_| {
            OutageError::DimensionMismatch(format!("{name} = {x} does not fit in u32"))
        })
    };
    let (m, n, t) = (set.m(), set.n(), set.len());
    let mut buf = Vec::with_capacity(HEADER_LEN + t * 16 * (m + n * m + n));
    buf.extend_from_slice(&MAGIC);
    buf.push(FORMAT_VERSION);
    buf.extend_from_slice(&[0; 3]);
    buf.extend_from_slice(&dim(m, "M")?.to_le_bytes());
    buf.extend_from_slice(&dim(n, "N")?.to_le_bytes());
    buf.extend_from_slice(&dim(t, "T")?.to_le_bytes());
    buf.push(u8::from(set.meta.seed.is_some()));
    buf.extend_from_slice(&set.meta.seed.unwrap_or(0).to_le_bytes());
    let g = &set.meta.geometry;
    put_pos(&mut buf, &g.bs_position);
    put_pos(&mut buf, &g.irs_position);
    put_pos(&mut buf, &g.user_region_center);
    for x in [
        g.user_region_side,
        g.beta_direct,
        g.beta_bs_irs,
        g.beta_irs_user,
    ] {
        put_f64(&mut buf, x);
    }
    put_pos(&mut buf, &set.meta.user_position);
    debug_assert_eq!(buf.len(), HEADER_LEN);
    for s in set.samples() {
        put_complex(&mut buf, &s.h_d);
        put_complex(&mut buf, &s.g);
        put_complex(&mut buf, &s.h_r);
    }
    Ok(buf)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn pos3(&mut self) -> std::result::Result<Position3D, String> {
        Ok(Position3D::new(self.f64()?, self.f64()?, self.f64()?))
    }

    fn complex(&mut self, k: usize) -> std::result::Result<Vec<Complex64>, String> {
        (0..k)
            .map(|_| Ok(Complex64::new(self.f64()?, self.f64()?)))
            .collect()
    }
}

fn decode_inner(bytes: &[u8]) -> std::result::Result<ChannelSampleSet, String> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = c.u8()?;
    if version != FORMAT_VERSION {
        return Err(format!("unsupported format version {version}"));
    }
    c.take(3)?;
    let (m, n, t) = (c.u32()? as usize, c.u32()? as usize, c.u32()? as usize);
    let has_seed = c.u8()?;
    let seed = c.u64()?;
    let geometry = ScenarioGeometry {
        bs_position: c.pos3()?,
        irs_position: c.pos3()?,
        user_region_center: c.pos3()?,
        user_region_side: c.f64()?,
        beta_direct: c.f64()?,
        beta_bs_irs: c.f64()?,
        beta_irs_user: c.f64()?,
    };
    let user_position = c.pos3()?;
    let per_sample = 16usize
        .checked_mul(m + n * m + n)
        .ok_or("dimensions overflow")?;
    if bytes.len() - c.pos != per_sample.checked_mul(t).ok_or("dimensions overflow")? {
        return Err(format!(
            "payload is {} bytes, expected {} for (M, N, T) = ({m}, {n}, {t})",
            bytes.len() - c.pos,
            per_sample * t
        ));
    }
    let mut samples = Vec::with_capacity(t);
    for _ in 0..t {
        let h_d = c.complex(m)?;
        let g = c.complex(n * m)?;
        let h_r = c.complex(n)?;
        samples.push(ChannelSample::new(h_d, g, h_r).map_err(|e| e.to_string())?);
    }
    let meta = SampleSetMeta {
        geometry,
        user_position,
        seed: (has_seed != 0).then_some(seed),
    };
    ChannelSampleSet::new(samples, meta).map_err(|e| e.to_string())
}

pub fn decode(bytes: &[u8], origin: &Path) -> Result<ChannelSampleSet> {
    decode_inner(bytes).map_err(|reason| OutageError::MalformedSampleFile {
        path: origin.to_path_buf(),
        reason,
    })
}

pub fn write_sample_set(set: &ChannelSampleSet, path: &Path) -> Result<()> {
    let bytes = encode(set)?;
    let mut f = std::fs::File::create(path).map_err(|e| OutageError::io(path, e))?;
    f.write_all(&bytes).map_err(|e| OutageError::io(path, e))
}

pub fn read_sample_set(path: &Path) -> Result<ChannelSampleSet> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| OutageError::io(path, e))?;
    decode(&bytes, path)
}
