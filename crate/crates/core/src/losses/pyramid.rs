use crate::image::Image;

/// Box-filter image pyramid. Level 0 is `img` itself; each further level
/// halves both dimensions. Stops early (returning fewer than `levels` images)
/// once a level would be smaller than 2 pixels along either axis.
pub fn build_pyramid(img: &Image, levels: usize) -> Vec<Image> {
    let mut out = vec![img.clone()];
    while out.len() < levels.max(1) {
        let last = out.last().expect("pyramid is never empty");
        if last.height() / 2 < 2 || last.width() / 2 < 2 {
            break;
        }
        let next = last.downsample().expect("dimensions checked above");
        out.push(next);
    }
    out
}

/// Pyramid of a single-channel `h x w` depth map, `levels` deep.
pub fn depth_pyramid(depth: &[f64], h: usize, w: usize, levels: usize) -> Vec<Vec<f64>> {
    let base = Image::new(h, w, 1, depth.to_vec()).expect("depth map shape");
    build_pyramid(&base, levels)
        .into_iter()
        .map(Image::into_data)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_level_is_input() {
        let img = Image::filled(3, 3, 2, 0.4);
        let p = build_pyramid(&img, 1);
        assert_eq!(p, vec![img]);
    }

    #[test]
    fn constant_stays_constant() {
        let img = Image::filled(4, 4, 1, 0.3);
        let p = build_pyramid(&img, 2);
        assert_eq!(p[1], Image::filled(2, 2, 1, 0.3));
    }

    #[test]
    fn level_one_is_block_mean() {
        let img = Image::from_fn(4, 4, 1, |i, j, _| (i * 4 + j) as f64);
        let p = build_pyramid(&img, 2);
        // blocks: {0,1,4,5} {2,3,6,7} {8,9,12,13} {10,11,14,15}
        assert_eq!(p[1].data(), &[2.5, 4.5, 10.5, 12.5]);
    }

    #[test]
    fn stops_before_degenerate_levels() {
        let img = Image::filled(8, 20, 1, 0.0);
        let p = build_pyramid(&img, 5);
        let dims: Vec<_> = p.iter().map(|l| (l.height(), l.width())).collect();
        assert_eq!(dims, vec![(8, 20), (4, 10), (2, 5)]);
    }
}
