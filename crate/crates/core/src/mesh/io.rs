//! JSON polygon mesh files: `{"vertices": [[x, y], ...], "cells": [[i0, i1, ...], ...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mesh, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
}

impl MeshFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh file serialises")
    }

    /// Same mesh with each cell rotated to start at its smallest vertex index.
    pub fn canonical(&self) -> Self {
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let start = c
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &v)| v)
                    .map_or(0, |(i, _)| i);
                let mut r = c.clone();
                r.rotate_left(start);
                r
            })
            .collect();
        Self {
            vertices: self.vertices.clone(),
            cells,
        }
    }

    pub fn into_mesh(self) -> Result<Mesh> {
        let vertices = self
            .vertices
            .iter()
            .map(|&[x, y]| Point::new(x, y))
            .collect();
        Mesh::from_polygons(vertices, self.cells)
    }
}

impl Mesh {
    pub fn to_mesh_file(&self) -> MeshFile {
        MeshFile {
            vertices: self.vertices().iter().map(|p| [p.x, p.y]).collect(),
            cells: self.cells().iter().map(|c| c.vertices.clone()).collect(),
        }
        .canonical()
    }
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    MeshFile::from_json(&text)?.into_mesh()
}
