/// Axis-aligned pixel rectangle `[x0, x0 + w) x [y0, y0 + h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x0 + self.w && y >= self.y0 && y < self.y0 + self.h
    }
}

/// Row-major tiling of an image into square patches. Border patches are
/// truncated to the image rather than padded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchGrid {
    pub patch_size: usize,
    pub patches: Vec<Rect>,
}

impl PatchGrid {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }
}

pub fn tile_patches(width: usize, height: usize, patch_size: usize) -> PatchGrid {
    assert!(
        width > 0 && height > 0 && patch_size > 0,
        "tiling needs positive dimensions"
    );
    let patches = (0..height)
        .step_by(patch_size)
        .flat_map(|y0| {
            (0..width).step_by(patch_size).map(move |x0| Rect {
                x0,
                y0,
                w: patch_size.min(width - x0),
                h: patch_size.min(height - y0),
            })
        })
        .collect();
    PatchGrid {
        patch_size,
        patches,
    }
}
