//! Suzuki-Abe border following on binary masks (8-connected foreground).

use crate::image::ChannelImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    Outer,
    Hole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    /// Border pixels in tracing order as `(x, y)`; consecutive points are
    /// 8-adjacent and the last point is adjacent to the first.
    pub points: Vec<(usize, usize)>,
    pub kind: ContourKind,
}

/// Neighbour offsets `(drow, dcol)` in clockwise order on screen (rows grow
/// downward), starting east.
const CW: [(i32, i32); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

fn dir_of(dr: i32, dc: i32) -> usize {
    CW.iter().position(|&d| d == (dr, dc)).expect("8-neighbour offset")
}

/// Traces every border of the nonzero pixels of `mask`, in raster order of
/// their starting pixels.
pub fn find_contours(mask: &ChannelImage) -> Vec<Contour> {
    let (w, h) = (mask.width(), mask.height());
    // one pixel of zero padding on every side
    let pw = w + 2;
    let ph = h + 2;
    let mut f = vec![0i32; pw * ph];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) != 0 {
                f[(y + 1) * pw + x + 1] = 1;
            }
        }
    }
    let at = |r: i32, c: i32| r as usize * pw + c as usize;

    let mut contours = Vec::new();
    let mut nbd: i32 = 1;
    for i in 1..(ph as i32 - 1) {
        for j in 1..(pw as i32 - 1) {
            let fij = f[at(i, j)];
            if fij == 0 {
                continue;
            }
            let start = if fij == 1 && f[at(i, j - 1)] == 0 {
                Some((ContourKind::Outer, (i, j - 1)))
            } else if fij >= 1 && f[at(i, j + 1)] == 0 {
                Some((ContourKind::Hole, (i, j + 1)))
            } else {
                None
            };
            let Some((kind, (i2, j2))) = start else {
                continue;
            };
            nbd += 1;
            let points = follow_border(&mut f, pw, (i, j), (i2, j2), nbd);
            contours.push(Contour {
                points: points
                    .into_iter()
                    .map(|(r, c)| (c as usize - 1, r as usize - 1))
                    .collect(),
                kind,
            });
        }
    }
    contours
}

fn follow_border(
    f: &mut [i32],
    pw: usize,
    origin: (i32, i32),
    from: (i32, i32),
    nbd: i32,
) -> Vec<(i32, i32)> {
    let at = |r: i32, c: i32| r as usize * pw + c as usize;
    let (i, j) = origin;

    // 3.1: clockwise search from `from` for the first nonzero neighbour
    let d0 = dir_of(from.0 - i, from.1 - j);
    let first = (0..8)
        .map(|k| CW[(d0 + k) % 8])
        .map(|(dr, dc)| (i + dr, j + dc))
        .find(|&(r, c)| f[at(r, c)] != 0);
    let Some((i1, j1)) = first else {
        f[at(i, j)] = -nbd;
        return vec![origin];
    };

    let mut points = vec![origin];
    let (mut i2, mut j2) = (i1, j1);
    let (mut i3, mut j3) = (i, j);
    loop {
        // 3.3: counter-clockwise search starting after (i2, j2)
        let d = dir_of(i2 - i3, j2 - j3);
        let mut east_zero_examined = false;
        let mut next = None;
        for k in 1..=8 {
            let dir = (d + 8 - k) % 8;
            let (dr, dc) = CW[dir];
            let (r, c) = (i3 + dr, j3 + dc);
            if f[at(r, c)] != 0 {
                next = Some((r, c));
                break;
            }
            if dir == 0 {
                east_zero_examined = true;
            }
        }
        let (i4, j4) = next.expect("border pixel has a nonzero neighbour");

        // 3.4
        if east_zero_examined {
            f[at(i3, j3)] = -nbd;
        } else if f[at(i3, j3)] == 1 {
            f[at(i3, j3)] = nbd;
        }

        // 3.5
        if (i4, j4) == (i, j) && (i3, j3) == (i1, j1) {
            break;
        }
        points.push((i4, j4));
        (i2, j2) = (i3, j3);
        (i3, j3) = (i4, j4);
    }
    points
}

/// All pixels enclosed by a closed contour, including its border pixels.
/// Pixels strictly inside are found by an even-odd crossing test against the
/// polygon through the border pixel centres.
pub fn fill_contour(contour: &Contour, width: usize, height: usize, mut paint: impl FnMut(usize, usize)) {
    let pts = &contour.points;
    for &(x, y) in pts {
        if x < width && y < height {
            paint(x, y);
        }
    }
    if pts.len() < 3 {
        return;
    }
    let ymin = pts.iter().map(|p| p.1).min().unwrap();
    let ymax = pts.iter().map(|p| p.1).max().unwrap();
    let mut xs: Vec<f64> = Vec::new();
    for y in ymin..=ymax {
        xs.clear();
        let yf = y as f64;
        for k in 0..pts.len() {
            let (x0, y0) = (pts[k].0 as f64, pts[k].1 as f64);
            let (x1, y1) = {
                let p = pts[(k + 1) % pts.len()];
                (p.0 as f64, p.1 as f64)
            };
            if (y0 > yf) != (y1 > yf) {
                xs.push(x0 + (yf - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in xs.chunks_exact(2) {
            let lo = pair[0].ceil().max(0.0) as usize;
            let hi = pair[1].floor();
            if hi < 0.0 {
                continue;
            }
            for x in lo..=(hi as usize).min(width.saturating_sub(1)) {
                if y < height {
                    paint(x, y);
                }
            }
        }
    }
}
