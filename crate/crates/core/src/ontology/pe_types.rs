//! Taxonomy of physical-equation (PE) types at four granularity levels.

use serde::{Deserialize, Serialize};

use super::ClassId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Granularity {
    Electronic,
    Atomistic,
    Mesoscopic,
    Continuum,
}

impl Granularity {
    pub const ALL: [Granularity; 4] = [
        Granularity::Electronic,
        Granularity::Atomistic,
        Granularity::Mesoscopic,
        Granularity::Continuum,
    ];

    /// Name of the `osmo:granularity_level` individual.
    pub fn individual_name(self) -> &'static str {
        match self {
            Granularity::Electronic => "ELECTRONIC",
            Granularity::Atomistic => "ATOMISTIC",
            Granularity::Mesoscopic => "MESOSCOPIC",
            Granularity::Continuum => "CONTINUUM",
        }
    }

    fn from_id_prefix(prefix: &str) -> Option<Self> {
        match prefix {
            "EL" => Some(Granularity::Electronic),
            "A" => Some(Granularity::Atomistic),
            "M" => Some(Granularity::Mesoscopic),
            "CO" => Some(Granularity::Continuum),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeTypeInfo {
    pub pe_type_id: String,
    pub granularity: Granularity,
    pub class_name: ClassId,
    pub description: String,
    pub romm_no: Option<String>,
}

/// Checks `^(EL|A|M|CO)\.[1-8]$`.
pub(crate) fn is_well_formed(id: &str) -> bool {
    let Some((prefix, num)) = id.split_once('.') else {
        return false;
    };
    Granularity::from_id_prefix(prefix).is_some()
        && num.len() == 1
        && matches!(num.as_bytes()[0], b'1'..=b'8')
}

// (id, RoMM number, class local name, category description)
const ROWS: [(&str, Option<&str>, &str, &str); 25] = [
    ("EL.1", Some("1.1"), "pe_type_electronic_qm_abinitio", "ab-initio quantum mechanical and first-principle models"),
    ("EL.2", Some("1.2"), "pe_type_electronic_manybody_effective", "electronic many-body and effective Hamiltonian models"),
    ("EL.3", Some("1.3"), "pe_type_electronic_time_dependent", "QM modelling of the response to time-dependent fields"),
    ("EL.4", Some("1.4"), "pe_type_electronic_charge_transport", "statistical charge transport models"),
    ("EL.5", Some("1.5"), "pe_type_electronic_spin_transport", "statistical electronic spin transport models"),
    ("A.1", Some("2.1"), "pe_type_atomistic_density_functional", "classical-mechanical DFT"),
    ("M.1", Some("3.1"), "pe_type_mesoscopic_density_functional", "classical-mechanical DFT"),
    ("A.2", Some("2.2"), "pe_type_atomistic_molecular_statics", "energy minimization and molecular statics"),
    ("M.2", None, "pe_type_mesoscopic_molecular_statics", "energy minimization and molecular statics"),
    ("A.3", Some("2.3"), "pe_type_atomistic_molecular_dynamics", "MD based on classical equations of motion"),
    ("M.3", Some("3.2"), "pe_type_mesoscopic_molecular_dynamics", "MD based on classical equations of motion"),
    ("A.4", Some("2.4"), "pe_type_atomistic_partition_function", "molecular partition-function equations"),
    ("M.4", Some("3.3"), "pe_type_mesoscopic_partition_function", "molecular partition-function equations"),
    ("A.5", Some("2.5"), "pe_type_atomistic_spin_model", "atomistic spin models"),
    ("M.5", Some("3.4"), "pe_type_mesoscopic_micromagnetism", "micromagnetism models"),
    ("A.6", Some("2.6, 2.7"), "pe_type_atomistic_statistical_transport", "molecular-level statistical transport models"),
    ("M.6", Some("3.5"), "pe_type_mesoscopic_statistical_transport", "molecular-level statistical transport models"),
    ("CO.1", Some("4.1"), "pe_type_continuum_solid_mechanics", "continuum solid mechanics"),
    ("CO.2", Some("4.2"), "pe_type_continuum_fluid_mechanics", "continuum fluid mechanics"),
    ("CO.3", Some("4.3"), "pe_type_continuum_heat_transfer", "thermomechanics and continuum modelling of heat transfer"),
    ("CO.4", Some("4.4.2"), "pe_type_continuum_phase_field", "phase field models and density gradient theory"),
    ("CO.5", Some("4.4.1"), "pe_type_continuum_thermodynamics", "continuum thermodynamics"),
    ("CO.6", Some("4.5"), "pe_type_continuum_reaction_kinetics", "continuum modelling of chemical reaction kinetics"),
    ("CO.7", Some("4.6"), "pe_type_continuum_electromagnetism", "continuum electromagnetism models, including optics"),
    ("CO.8", Some("4.7"), "pe_type_continuum_process_model", "continuum process models, including flowchart models"),
];

pub fn pe_type_table() -> Vec<PeTypeInfo> {
    ROWS.iter()
        .map(|(id, romm, class, desc)| {
            let prefix = id.split('.').next().unwrap_or_default();
            PeTypeInfo {
                pe_type_id: id.to_string(),
                granularity: Granularity::from_id_prefix(prefix).expect("table ids are well formed"),
                class_name: ClassId::osmo(class),
                description: desc.to_string(),
                romm_no: romm.map(str::to_string),
            }
        })
        .collect()
}

/// Model types considered by VISO and the PE types they map onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelType {
    Dft,
    Md,
    Mc,
    Dpd,
    Cfd,
    Eos,
}

impl ModelType {
    pub const ALL: [ModelType; 6] = [
        ModelType::Dft,
        ModelType::Md,
        ModelType::Mc,
        ModelType::Dpd,
        ModelType::Cfd,
        ModelType::Eos,
    ];

    pub fn pe_type_ids(self) -> &'static [&'static str] {
        match self {
            ModelType::Dft => &["EL.1"],
            ModelType::Md => &["A.3", "M.3"],
            ModelType::Mc => &["A.4", "M.4"],
            ModelType::Dpd => &["M.3"],
            ModelType::Cfd => &["CO.2"],
            ModelType::Eos => &["CO.5"],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formedness() {
        for ok in ["EL.1", "A.8", "M.3", "CO.5"] {
            assert!(is_well_formed(ok), "{ok}");
        }
        for bad in ["X.9", "EL.0", "EL.9", "A.10", "A3", "", "co.1", "CO."] {
            assert!(!is_well_formed(bad), "{bad}");
        }
    }

    #[test]
    fn table_prefix_matches_granularity() {
        let table = pe_type_table();
        assert_eq!(table.len(), 25);
        for row in &table {
            assert!(is_well_formed(&row.pe_type_id));
            let prefix = row.pe_type_id.split('.').next().unwrap();
            assert_eq!(Granularity::from_id_prefix(prefix), Some(row.granularity));
        }
    }
}
