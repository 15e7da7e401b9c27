use super::VoxelError;

#[derive(Clone, Debug, PartialEq)]
pub struct Compartment {
    pub label: u8,
    pub name: String,
    /// Outer radius for concentric-sphere models.
    pub outer_radius_mm: Option<f64>,
    pub conductivity_s_per_m: f64,
}

/// Labels playing the roles the leak audit and source checks care about.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TissueRoles {
    pub brain: Option<u8>,
    pub csf: Option<u8>,
    pub skull: Option<u8>,
    pub skin: Option<u8>,
}

/// Ordered (inside to outside) list of conductive compartments.
#[derive(Clone, Debug, PartialEq)]
pub struct CompartmentTable {
    entries: Vec<Compartment>,
    roles: TissueRoles,
}

impl CompartmentTable {
    pub fn new(entries: Vec<Compartment>, roles: TissueRoles) -> Result<Self, VoxelError> {
        if entries.is_empty() {
            return Err(VoxelError::InvalidTable("no compartments".into()));
        }
        for (n, c) in entries.iter().enumerate() {
            if c.label == 0 {
                return Err(VoxelError::InvalidTable(format!("label 0 is reserved for air ({})", c.name)));
            }
            if !(c.conductivity_s_per_m > 0.0 && c.conductivity_s_per_m.is_finite()) {
                return Err(VoxelError::InvalidTable(format!(
                    "conductivity of {} must be positive, got {}",
                    c.name, c.conductivity_s_per_m
                )));
            }
            if entries[..n].iter().any(|o| o.label == c.label) {
                return Err(VoxelError::InvalidTable(format!("duplicate label {}", c.label)));
            }
        }
        let table = Self { entries, roles };
        for (role, label) in [
            ("brain", roles.brain),
            ("csf", roles.csf),
            ("skull", roles.skull),
            ("skin", roles.skin),
        ] {
            if let Some(l) = label {
                if table.get(l).is_none() {
                    return Err(VoxelError::InvalidTable(format!("{role} role refers to unknown label {l}")));
                }
            }
        }
        Ok(table)
    }

    /// Four-layer sphere: brain 78 mm / 0.33, CSF 80 mm / 1.79,
    /// skull 86 mm / 0.01, skin 92 mm / 0.43 S/m, labels 1..=4.
    pub fn four_layer_sphere() -> Self {
        let mk = |label, name: &str, r, s| Compartment {
            label,
            name: name.to_string(),
            outer_radius_mm: Some(r),
            conductivity_s_per_m: s,
        };
        Self::new(
            vec![
                mk(1, "brain", 78.0, 0.33),
                mk(2, "csf", 80.0, 1.79),
                mk(3, "skull", 86.0, 0.01),
                mk(4, "skin", 92.0, 0.43),
            ],
            TissueRoles { brain: Some(1), csf: Some(2), skull: Some(3), skin: Some(4) },
        )
        .expect("built-in table is valid")
    }

    pub fn entries(&self) -> &[Compartment] {
        &self.entries
    }

    pub fn roles(&self) -> TissueRoles {
        self.roles
    }

    pub fn get(&self, label: u8) -> Option<&Compartment> {
        self.entries.iter().find(|c| c.label == label)
    }

    pub fn conductivity(&self, label: u8) -> Option<f64> {
        self.get(label).map(|c| c.conductivity_s_per_m)
    }

    /// Dense lookup `label -> conductivity` (0 for air and unknown labels).
    pub fn conductivity_lut(&self) -> [f64; 256] {
        let mut lut = [0.0; 256];
        for c in &self.entries {
            lut[c.label as usize] = c.conductivity_s_per_m;
        }
        lut
    }

    pub fn set_outer_radius(&mut self, label: u8, radius_mm: f64) -> Result<(), VoxelError> {
        let c = self
            .entries
            .iter_mut()
            .find(|c| c.label == label)
            .ok_or_else(|| VoxelError::InvalidTable(format!("unknown label {label}")))?;
        c.outer_radius_mm = Some(radius_mm);
        Ok(())
    }

    pub fn with_outer_radius(mut self, label: u8, radius_mm: f64) -> Result<Self, VoxelError> {
        self.set_outer_radius(label, radius_mm)?;
        Ok(self)
    }

    pub fn set_conductivity(&mut self, label: u8, sigma: f64) -> Result<(), VoxelError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(VoxelError::InvalidTable(format!("conductivity must be positive, got {sigma}")));
        }
        let c = self
            .entries
            .iter_mut()
            .find(|c| c.label == label)
            .ok_or_else(|| VoxelError::InvalidTable(format!("unknown label {label}")))?;
        c.conductivity_s_per_m = sigma;
        Ok(())
    }

    /// Radii inside-out; errors if any is missing or the sequence is not
    /// strictly increasing.
    pub fn sphere_radii(&self) -> Result<Vec<f64>, VoxelError> {
        let mut radii = Vec::with_capacity(self.entries.len());
        for c in &self.entries {
            let r = c
                .outer_radius_mm
                .ok_or_else(|| VoxelError::InvalidTable(format!("compartment {} has no radius", c.name)))?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(VoxelError::InvalidTable(format!("radius of {} must be positive", c.name)));
            }
            if let Some(&prev) = radii.last() {
                if r <= prev {
                    return Err(VoxelError::InvalidTable(format!(
                        "radii must increase outward: {} mm ({}) after {} mm",
                        r, c.name, prev
                    )));
                }
            }
            radii.push(r);
        }
        Ok(radii)
    }

    pub fn conductivities(&self) -> Vec<f64> {
        self.entries.iter().map(|c| c.conductivity_s_per_m).collect()
    }
}
