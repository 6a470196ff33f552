//! Trajectory serialization: CSV (one row per stored frame) and a compact
//! little-endian binary layout.
//!
//! Binary layout: magic `KPP1`, then `f64` x_lo, x_hi, node count, frame
//! count, followed per frame by `t`, frame shift and the node values.

use std::io::{Read, Write};

use super::{Field, Frame, Grid1D, Trajectory};
use crate::fmt::sig;
use crate::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"KPP1";

/// Writes `t,frame_shift,u0,...,u{n-1}` rows; the header lists node positions.
pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let g = traj.grid();
    write!(w, "t,frame_shift")?;
    for x in g.nodes() {
        write!(w, ",x={}", sig(x))?;
    }
    writeln!(w)?;
    for f in traj.frames() {
        write!(w, "{},{}", sig(f.t()), sig(f.frame_shift()))?;
        for v in f.values() {
            write!(w, ",{}", sig(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let g = traj.grid();
    w.write_all(BINARY_MAGIC)?;
    let head = [g.x_lo(), g.x_hi(), g.len() as f64, traj.frames().len() as f64];
    for v in head {
        w.write_all(&v.to_le_bytes())?;
    }
    for f in traj.frames() {
        w.write_all(&f.t().to_le_bytes())?;
        w.write_all(&f.frame_shift().to_le_bytes())?;
        for v in f.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a trajectory written by [`write_binary`]. Time step and frame are
/// not stored; they come back as the spacing of the first two frames and
/// [`Frame::Fixed`].
pub fn read_binary<R: Read>(mut r: R) -> Result<Trajectory> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Format("bad trajectory magic".into()));
    }
    let x_lo = read_f64(&mut r)?;
    let x_hi = read_f64(&mut r)?;
    let n = read_f64(&mut r)?;
    let m = read_f64(&mut r)?;
    if n.fract() != 0.0 || m.fract() != 0.0 || n < 3.0 || m < 1.0 {
        return Err(Error::Format("bad trajectory header".into()));
    }
    let grid = Grid1D::new(x_lo, x_hi, n as usize)?;
    let mut frames = Vec::with_capacity(m as usize);
    for _ in 0..m as usize {
        let t = read_f64(&mut r)?;
        let shift = read_f64(&mut r)?;
        let values = (0..grid.len()).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut f = Field::new(grid, values, t)?;
        f.frame_shift = shift;
        frames.push(f);
    }
    let dt = if frames.len() > 1 { frames[1].t() - frames[0].t() } else { 0.0 };
    Ok(Trajectory::from_frames(frames, dt, Frame::Fixed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::make_constant;
    use crate::kppsolve::{init, solve_moving_frame, InitialData, SolveConfig};

    fn sample() -> Trajectory {
        let g = Grid1D::new(-5.0, 5.0, 11).unwrap();
        let f = init(&InitialData::heaviside(0.0), &g).unwrap();
        let p = make_constant(1.0, 0.0, 1.0).unwrap();
        solve_moving_frame(&f, &p, 1.0, 0.3, &SolveConfig::with_dt(0.1).store_every(1).margin(0.0)).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let traj = sample();
        let mut buf = Vec::new();
        write_binary(&traj, &mut buf).unwrap();
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.frames(), traj.frames());
    }

    #[test]
    fn bad_magic_is_rejected() {
        assert!(matches!(read_binary(&b"XXXX"[..]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_has_one_row_per_frame() {
        let traj = sample();
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines.len(), traj.frames().len() + 1);
        assert!(lines[0].starts_with("t,frame_shift,x=-5"));
        assert_eq!(lines[1].split(',').count(), 13);
    }
}
