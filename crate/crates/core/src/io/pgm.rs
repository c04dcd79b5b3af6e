//! Plain-text portable graymap (P2) export of intensity images.

use std::io::Write;

use crate::error::Result;
use crate::metrics::IntensityImage;
use crate::scalar::Real;

/// Writes a P2 PGM with intensities scaled so the brightest pixel maps to
/// 65535. An all-zero image writes all zeros.
pub fn write_pgm<W: Write, T: Real>(w: &mut W, image: &IntensityImage<T>) -> Result<()> {
    let max = image
        .pixels()
        .iter()
        .cloned()
        .fold(T::zero(), |a, b| a.max(b));
    writeln!(w, "P2")?;
    writeln!(w, "{} {}", image.cols(), image.rows())?;
    writeln!(w, "65535")?;
    let scale = if max > T::zero() {
        T::from_f64_lossy(65535.0) / max
    } else {
        T::zero()
    };
    for r in 0..image.rows() {
        let line: Vec<String> = (0..image.cols())
            .map(|c| {
                let v = (image.get(r, c) * scale).round().to_f64_lossy() as u32;
                v.min(65535).to_string()
            })
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Parses a P2 PGM back into an intensity image (for tests and tooling).
pub fn read_pgm<T: Real>(text: &str) -> Result<IntensityImage<T>> {
    let mut tokens = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split_whitespace());
    let magic = tokens.next().unwrap_or("");
    if magic != "P2" {
        return Err(crate::error::Error::Container(format!(
            "expected P2 graymap, found {magic:?}"
        )));
    }
    let parse = |s: Option<&str>| -> Result<usize> {
        s.and_then(|t| t.parse().ok())
            .ok_or_else(|| crate::error::Error::Container("bad graymap header".into()))
    };
    let cols = parse(tokens.next())?;
    let rows = parse(tokens.next())?;
    let _maxval = parse(tokens.next())?;
    let mut pixels = Vec::with_capacity(rows * cols);
    for t in tokens {
        let v: f64 = t
            .parse()
            .map_err(|_| crate::error::Error::Container("bad graymap pixel".into()))?;
        pixels.push(T::from_f64_lossy(v));
    }
    IntensityImage::new(rows, cols, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_preserves_argmax() {
        let mut px = vec![1.0f64; 12];
        px[7] = 50.0;
        let img = IntensityImage::new(3, 4, px).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &img).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("P2\n4 3\n65535\n"));
        let back: IntensityImage<f64> = read_pgm(&text).unwrap();
        assert_eq!(back.argmax(), img.argmax());
        assert_eq!(back.get(1, 3), 65535.0);
    }

    #[test]
    fn zero_image_writes_zeros() {
        let img = IntensityImage::new(2, 2, vec![0.0f64; 4]).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &img).unwrap();
        let back: IntensityImage<f64> = read_pgm(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert!(back.pixels().iter().all(|&v| v == 0.0));
    }
}
