//! ASCII picture of a two-thread grid: thread 0 runs left to right, thread 1
//! bottom to top. Cells sit at integer positions and at the midpoints
//! between them, so forbidden blocks show even when they hold no integer
//! state. `#` forbidden, `*` path, `D` marked state, `+` grid point.

use pvguard_core::{LatticePath, Program, State};

/// Largest thread length drawn.
const MAX_LEN: usize = 30;

/// Use of each resource at half-position `u`: a point when even, the open
/// segment after `u / 2` when odd.
fn half_use(p: &Program, c: usize, u: usize) -> Vec<u8> {
    let t = p.thread(c);
    let r = if u % 2 == 0 { t.point_use(u / 2) } else { t.segment_use(u / 2) };
    r.expect("half position in range")
}

pub fn draw(p: &Program, path: Option<&LatticePath>, marks: &[State]) -> Option<String> {
    if p.len() != 2 || p.thread(0).len() > MAX_LEN || p.thread(1).len() > MAX_LEN {
        return None;
    }
    let (w, h) = (2 * p.thread(0).top() + 1, 2 * p.thread(1).top() + 1);
    let caps: Vec<u32> = p.caps().iter().map(|(_, _, c)| c).collect();
    let cols: Vec<Vec<u8>> = (0..w).map(|u| half_use(p, 0, u)).collect();
    let rows: Vec<Vec<u8>> = (0..h).map(|v| half_use(p, 1, v)).collect();

    let mut cells = vec![vec![' '; w]; h];
    for (v, row) in cells.iter_mut().enumerate() {
        for (u, cell) in row.iter_mut().enumerate() {
            let over = (0..caps.len()).any(|r| (cols[u][r] + rows[v][r]) as u32 > caps[r]);
            *cell = if over {
                '#'
            } else if u % 2 == 0 && v % 2 == 0 {
                '+'
            } else {
                ' '
            };
        }
    }
    if let Some(path) = path {
        let states = path.states();
        for s in &states {
            cells[2 * s[1]][2 * s[0]] = '*';
        }
        for pair in states.windows(2) {
            cells[pair[0][1] + pair[1][1]][pair[0][0] + pair[1][0]] = '*';
        }
    }
    for s in marks {
        cells[2 * s[1]][2 * s[0]] = 'D';
    }

    let names = p.caps();
    let (t0, t1) = (p.thread(0), p.thread(1));
    let left = (0..=t1.top()).map(|y| t1.label(y, names).chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for v in (0..h).rev() {
        let label = if v % 2 == 0 { t1.label(v / 2, names) } else { String::new() };
        let mut line = " ".repeat(left - label.chars().count());
        line.push_str(&label);
        line.push(' ');
        for u in 0..w {
            line.push(cells[v][u]);
            line.push(if u + 1 < w && cells[v][u] == '#' && cells[v][u + 1] == '#' { '#' } else { ' ' });
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    let mut axis = " ".repeat(left + 1);
    for x in 0..=t0.top() {
        let label = t0.label(x, names);
        axis.push_str(&format!("{label:<4}"));
    }
    out.push_str(axis.trim_end());
    out.push('\n');
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pvguard_core::parse_source;

    #[test]
    fn crossed_pair_picture() {
        let m = parse_source(
            "resource a cap 1\nresource b cap 1\nthread T1 = Pa Pb Vb Va\nthread T2 = Pb Pa Va Vb\nprogram m = T1 | T2",
        )
        .unwrap();
        let p = m.program("m").unwrap();
        let pic = draw(&p, None, &[State(vec![2, 2])]).unwrap();
        let rows: Vec<&str> = pic.lines().collect();
        assert_eq!(rows.len(), 12);
        // rows run top down; half-row 4 is thread 1 at position 2
        let row: Vec<char> = rows[10 - 4].chars().skip(3).step_by(2).collect();
        assert_eq!(row[4], 'D');
        assert_eq!(row[5], '#');
        assert_eq!(row[0], '+');
        assert!(pic.contains('#'));
    }

    #[test]
    fn only_pairs_are_drawn() {
        let m = parse_source("resource a cap 1\nthread T = Pa Va\nprogram m = T^3").unwrap();
        assert!(draw(&m.program("m").unwrap(), None, &[]).is_none());
    }
}
