use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::gates::adjacent;
use super::{ClockError, Result};

pub type Cell = (i64, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurnSide {
    /// Hand-off along the vertical left edge, through slots at `x = -1`.
    Left,
    /// Hand-off along the staircase `x + y = b`.
    Right,
}

/// Three head moves at a row end: tape cell, boundary slot of this row,
/// boundary slot of the next row, first tape cell of the next row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub row: usize,
    pub side: TurnSide,
    pub path: [Cell; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub from: Cell,
    pub to: Cell,
}

/// Boustrophedon tape over the triangle `{(i, j) : i + j < b}`, row 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnakePath {
    pub b: usize,
    pub cells: Vec<Cell>,
    /// Direction of each row; odd rows run right to left.
    pub directions: Vec<Direction>,
    pub turns: Vec<Turn>,
}

pub fn snake_path(b: usize) -> Result<SnakePath> {
    if b == 0 {
        return Err(ClockError::Layout("snake needs b >= 1".into()));
    }
    let b = b as i64;
    let mut cells = Vec::new();
    let mut directions = Vec::new();
    let mut turns = Vec::new();
    for j in 0..b {
        let len = b - j;
        if j % 2 == 0 {
            directions.push(Direction::LeftToRight);
            cells.extend((0..len).map(|i| (i, j)));
        } else {
            directions.push(Direction::RightToLeft);
            cells.extend((0..len).rev().map(|i| (i, j)));
        }
        if j + 1 < b {
            let path = if j % 2 == 0 {
                [
                    (b - 1 - j, j),
                    (b - j, j),
                    (b - j - 1, j + 1),
                    (b - j - 2, j + 1),
                ]
            } else {
                [(0, j), (-1, j), (-1, j + 1), (0, j + 1)]
            };
            let side = if j % 2 == 0 {
                TurnSide::Right
            } else {
                TurnSide::Left
            };
            turns.push(Turn {
                row: j as usize,
                side,
                path,
            });
        }
    }
    Ok(SnakePath {
        b: b as usize,
        cells,
        directions,
        turns,
    })
}

impl SnakePath {
    pub fn contains(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && ((c.0 + c.1) as usize) < self.b
    }

    /// Whether consecutive tape cells are lattice neighbours (diagonals allowed).
    pub fn is_connected(&self) -> bool {
        self.cells.windows(2).all(|w| adjacent(w[0], w[1]))
    }

    /// Every head move: single steps inside a row, three per turn.
    pub fn schedule(&self) -> Vec<Move> {
        let mut out = Vec::new();
        let mut turns = self.turns.iter();
        for w in self.cells.windows(2) {
            if w[0].1 == w[1].1 {
                out.push(Move {
                    from: w[0],
                    to: w[1],
                });
            } else {
                let t = turns.next().expect("one turn per row change");
                out.extend(t.path.windows(2).map(|p| Move {
                    from: p[0],
                    to: p[1],
                }));
            }
        }
        out
    }

    /// Tape cells and boundary slots touched by the head, sorted.
    pub fn positions(&self) -> Vec<Cell> {
        let mut set: BTreeSet<Cell> = self.cells.iter().copied().collect();
        for t in &self.turns {
            set.extend(t.path);
        }
        set.into_iter().collect()
    }
}

/// Replay the schedule as transpositions acting on a one-hot head register
/// and return the tape cells in the order the head lands on them.
pub fn replay_schedule(path: &SnakePath) -> Result<Vec<Cell>> {
    let positions = path.positions();
    let index = |c: Cell| {
        positions
            .binary_search(&c)
            .map_err(|_| ClockError::Layout(format!("schedule leaves the layout at {c:?}")))
    };
    let mut head = vec![0u8; positions.len()];
    head[index(path.cells[0])?] = 1;
    let mut visited = vec![path.cells[0]];
    for m in path.schedule() {
        let (a, b) = (index(m.from)?, index(m.to)?);
        if head[a] != 1 {
            return Err(ClockError::Layout(format!(
                "move {:?} -> {:?} without the head",
                m.from, m.to
            )));
        }
        head.swap(a, b);
        if path.contains(m.to) {
            visited.push(m.to);
        }
    }
    Ok(visited)
}
