//! CSV encoding of traces.
//!
//! Floats are written in Rust's shortest round-trip form, so a trace read
//! back is bit-identical to the one written, and equal traces give equal
//! bytes.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::simulator::{Configuration, RunTrace};

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("bad {what} '{s}'")))
}

fn parse_u64(s: &str, what: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| Error::InvalidArgument(format!("bad {what} '{s}'")))
}

/// `round,agent,comp_0,...,comp_{d-1}`, one row per agent per round.
pub fn write_positions<W: Write>(w: W, configs: &[Configuration]) -> Result<()> {
    let d = configs.first().map_or(0, Configuration::dim);
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["round".to_string(), "agent".to_string()];
    header.extend((0..d).map(|k| format!("comp_{k}")));
    out.write_record(&header)?;
    for cfg in configs {
        for (p, x) in cfg.positions.iter().enumerate() {
            let mut rec = vec![cfg.round.to_string(), p.to_string()];
            rec.extend(x.coords().iter().map(|&c| fmt_f64(c)));
            out.write_record(&rec)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_positions<R: Read>(r: R) -> Result<Vec<Configuration>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "round" || &header[1] != "agent" {
        return Err(Error::InvalidArgument(
            "positions CSV must start with columns round,agent,comp_0".into(),
        ));
    }
    let d = header.len() - 2;
    let mut configs: Vec<Configuration> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let round = parse_u64(&rec[0], "round")?;
        let agent = parse_u64(&rec[1], "agent")? as usize;
        let coords = (0..d)
            .map(|k| parse_f64(&rec[k + 2], "coordinate"))
            .collect::<Result<Vec<_>>>()?;
        let x = Point::new(coords)?;
        match configs.last_mut() {
            Some(c) if c.round == round => {
                if agent != c.positions.len() {
                    return Err(Error::InvalidArgument(format!("agent {agent} out of order in round {round}")));
                }
                c.positions.push(x);
            }
            last => {
                if let Some(c) = last {
                    if round != c.round + 1 {
                        return Err(Error::InvalidArgument(format!("round {round} follows round {}", c.round)));
                    }
                }
                if agent != 0 {
                    return Err(Error::InvalidArgument(format!("round {round} does not start at agent 0")));
                }
                configs.push(Configuration { positions: vec![x], round });
            }
        }
    }
    if let Some(first) = configs.first() {
        let n = first.n();
        if configs.iter().any(|c| c.n() != n) {
            return Err(Error::InvalidArgument("rounds list different numbers of agents".into()));
        }
    }
    Ok(configs)
}

/// `round,k,delta_k`.
pub fn write_deltas<W: Write>(w: W, deltas: &[Vec<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["round", "k", "delta_k"])?;
    for (t, row) in deltas.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            out.write_record([t.to_string(), k.to_string(), fmt_f64(v)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_deltas<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["round", "k", "delta_k"] {
        return Err(Error::InvalidArgument("delta CSV must have columns round,k,delta_k".into()));
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let t = parse_u64(&rec[0], "round")? as usize;
        let k = parse_u64(&rec[1], "component")? as usize;
        let v = parse_f64(&rec[2], "delta")?;
        if t == out.len() && k == 0 {
            out.push(vec![v]);
        } else if t + 1 == out.len() && k == out[t].len() {
            out[t].push(v);
        } else {
            return Err(Error::InvalidArgument(format!("delta row ({t}, {k}) out of order")));
        }
    }
    Ok(out)
}

/// `round,agent,alpha`; rounds without a measured margin are omitted.
pub fn write_margins<W: Write>(w: W, margins: &[Vec<Option<f64>>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["round", "agent", "alpha"])?;
    for (t, row) in margins.iter().enumerate() {
        for (p, m) in row.iter().enumerate() {
            if let Some(m) = m {
                out.write_record([t.to_string(), p.to_string(), fmt_f64(*m)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// `(round, agent, alpha)` triples.
pub fn read_margins<R: Read>(r: R) -> Result<Vec<(u64, usize, f64)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["round", "agent", "alpha"] {
        return Err(Error::InvalidArgument("margin CSV must have columns round,agent,alpha".into()));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok((
                parse_u64(&rec[0], "round")?,
                parse_u64(&rec[1], "agent")? as usize,
                parse_f64(&rec[2], "alpha")?,
            ))
        })
        .collect()
}

/// Positions and deltas of `trace` as two CSV byte buffers.
pub fn encode_trace(trace: &RunTrace) -> Result<(Vec<u8>, Vec<u8>)> {
    let mut pos = Vec::new();
    write_positions(&mut pos, &trace.configs)?;
    let mut del = Vec::new();
    write_deltas(&mut del, &trace.deltas)?;
    Ok((pos, del))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn positions_round_trip_bit_exact() {
        let configs = vec![
            Configuration { positions: vec![pt(&[0.1, 1.0 / 3.0]), pt(&[-2.5e-300, 7.0])], round: 0 },
            Configuration { positions: vec![pt(&[0.30000000000000004, 1e20]), pt(&[5e-324, -0.0])], round: 1 },
        ];
        let mut buf = Vec::new();
        write_positions(&mut buf, &configs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("round,agent,comp_0,comp_1\n0,0,0.1,"));
        let back = read_positions(&buf[..]).unwrap();
        for (a, b) in configs.iter().zip(&back) {
            for (p, q) in a.positions.iter().zip(&b.positions) {
                for (x, y) in p.coords().iter().zip(q.coords()) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }

    #[test]
    fn deltas_and_margins_round_trip() {
        let deltas = vec![vec![1.0, 0.5], vec![0.25, 1e-17]];
        let mut buf = Vec::new();
        write_deltas(&mut buf, &deltas).unwrap();
        assert_eq!(read_deltas(&buf[..]).unwrap(), deltas);

        let margins = vec![vec![None, None], vec![Some(0.5), None], vec![Some(0.25), Some(1.0 / 3.0)]];
        let mut buf = Vec::new();
        write_margins(&mut buf, &margins).unwrap();
        assert_eq!(
            read_margins(&buf[..]).unwrap(),
            vec![(1, 0, 0.5), (2, 0, 0.25), (2, 1, 1.0 / 3.0)]
        );
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_positions("t,agent,x\n0,0,1\n".as_bytes()).is_err());
        assert!(read_positions("round,agent,comp_0\n0,1,1\n".as_bytes()).is_err());
        assert!(read_positions("round,agent,comp_0\n0,0,1\n2,0,1\n".as_bytes()).is_err());
        assert!(read_positions("round,agent,comp_0\n0,0,abc\n".as_bytes()).is_err());
        assert!(read_positions("round,agent,comp_0\n0,0,1\n0,1,2\n1,0,1\n".as_bytes()).is_err());
        assert!(read_deltas("round,k,delta_k\n0,1,1\n".as_bytes()).is_err());
        assert!(read_margins("round,agent\n".as_bytes()).is_err());
    }
}
