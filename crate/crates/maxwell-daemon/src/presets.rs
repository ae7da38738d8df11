//! Named configurations shipped with the binary.

use crate::Subcommand;

pub struct Preset {
    pub name: &'static str,
    pub subcommand: Subcommand,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $sub:ident) => {
        Preset {
            name: $name,
            subcommand: Subcommand::$sub,
            text: include_str!(concat!("../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("classical-above-cutoff", Classical),
    preset!("classical-empty", Classical),
    preset!("classical-sorting", Classical),
    preset!("em-empty", Em),
    preset!("em-bilayer", Em),
    preset!("epsilon-sorting", Epsilon),
    preset!("epsilon-steep-start", Epsilon),
    preset!("epsilon-harmonic", Epsilon),
    preset!("epsilon-vacuum", Epsilon),
    preset!("greens-a20pi", Greens),
    preset!("greens-constant", Greens),
    preset!("greens-zero-coupling", Greens),
    preset!("lattice-sorting", LatticeRun),
    preset!("lattice-beta-sweep", LatticeRun),
    preset!("lattice-lateral", LatticeRun),
    preset!("lattice-free", LatticeRun),
    preset!("lattice-uniform", LatticeRun),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_validates() {
        for p in PRESETS {
            crate::commands::check(p.subcommand, p.text, p.name).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn names_are_unique() {
        for (i, p) in PRESETS.iter().enumerate() {
            assert!(PRESETS[i + 1..].iter().all(|q| q.name != p.name));
        }
    }
}
