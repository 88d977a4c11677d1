//! JSON formats for instances and synthesized mechanisms.
//!
//! Every rational is a string such as `"3"`, `"-1/2"` or `"7/3"`.
//!
//! ```json
//! {
//!   "problem": { "preset": "single_item", "sellers": 2 },
//!   "distribution": [
//!     { "costs": [["1"], ["2"]], "prob": "1/2" },
//!     { "costs": [["3"], ["1"]], "prob": "1/2" }
//!   ],
//!   "kappa": "0"
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::bounds::BoundedSupport;
use crate::dsicext::ProductSupport;
use crate::error::{bail, Error, Result};
use crate::instances;
use crate::mechanism::Mechanism;
use crate::model::{Allocation, Coverage, CoveringProblem, Player, PublicCost, SupportedDistribution, TypeProfile};
use crate::plugins::{bufl_cmlp_encode, coverage_cmlp, BuflSpec};
use crate::rational::Rational;
use crate::relax::CmLp;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    SingleItem {
        sellers: usize,
    },
    VertexCover {
        nodes: usize,
        edges: Vec<(usize, usize)>,
    },
    SetCover {
        universe: usize,
        sets: Vec<Vec<usize>>,
    },
    /// One covering object per unit, named `item{ℓ}#{k}`.
    Procurement {
        supply: Vec<Vec<u32>>,
        demand: Vec<u32>,
    },
    Bufl {
        owners: Vec<Vec<usize>>,
        /// `distance[facility][client]`.
        distance: Vec<Vec<Rational>>,
        #[serde(default)]
        budget: Option<Rational>,
    },
    /// Explicit public costs; unlisted allocations are infeasible.
    Table {
        players: Vec<Player>,
        rows: Vec<TableRow>,
    },
    Coverage {
        players: Vec<Player>,
        demand: Vec<u32>,
        /// `supplies[i][v]`: `(item, units)` pairs of object `v` of player `i`.
        supplies: Vec<Vec<Vec<(usize, u32)>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    /// Object indices allocated to each player.
    pub allocation: Vec<Vec<usize>>,
    pub cost: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub costs: Vec<Vec<Rational>>,
    pub prob: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub problem: ProblemSpec,
    pub distribution: Vec<ProfileEntry>,
    #[serde(default)]
    pub kappa: Option<Rational>,
    /// A covering LP for the relaxed mode; derived from the preset when absent.
    #[serde(default)]
    pub cmlp: Option<CmLp>,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: ProblemSpec,
    pub problem: CoveringProblem,
    pub distribution: SupportedDistribution,
    pub kappa: Rational,
    cmlp: Option<CmLp>,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<CoveringProblem> {
        match self {
            ProblemSpec::SingleItem { sellers } => Ok(instances::single_item(*sellers)),
            ProblemSpec::VertexCover { nodes, edges } => instances::vertex_cover(*nodes, edges),
            ProblemSpec::SetCover { universe, sets } => instances::set_cover(*universe, sets),
            ProblemSpec::Procurement { supply, demand } => instances::procurement(supply, demand),
            ProblemSpec::Bufl { .. } => self.bufl().expect("bufl preset").problem(),
            ProblemSpec::Table { players, rows } => {
                let table = rows.iter().map(|r| (Allocation::from_sets(&r.allocation), r.cost.clone())).collect();
                CoveringProblem::new(players.clone(), PublicCost::Table(table))
            }
            ProblemSpec::Coverage { players, demand, supplies } => CoveringProblem::new(
                players.clone(),
                PublicCost::Coverage(Coverage { demand: demand.clone(), supplies: supplies.clone() }),
            ),
        }
    }

    pub fn bufl(&self) -> Option<BuflSpec> {
        match self {
            ProblemSpec::Bufl { owners, distance, budget } => {
                Some(BuflSpec { owners: owners.clone(), distance: distance.clone(), budget: budget.clone() })
            }
            _ => None,
        }
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("instance JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances serialize")
    }

    pub fn load(self) -> Result<Instance> {
        let problem = self.problem.build()?;
        let support = self.distribution.into_iter().map(|e| (TypeProfile(e.costs), e.prob)).collect();
        let distribution = SupportedDistribution::new(&problem, support)?;
        let kappa = self.kappa.unwrap_or_default();
        if kappa.is_negative() {
            bail!(Input, "negative kappa {}", kappa);
        }
        if let Some(lp) = &self.cmlp {
            if lp.object_counts != problem.object_counts() {
                bail!(Input, "covering LP does not match the players' objects");
            }
        }
        Ok(Instance { spec: self.problem, problem, distribution, kappa, cmlp: self.cmlp })
    }
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        InstanceFile::from_json(text)?.load()
    }

    /// The covering LP: the one supplied, else the coverage or facility LP of the preset.
    pub fn cmlp(&self) -> Result<CmLp> {
        if let Some(lp) = &self.cmlp {
            return Ok(lp.clone());
        }
        if let Some(spec) = self.spec.bufl() {
            return bufl_cmlp_encode(&spec);
        }
        match self.problem.public {
            PublicCost::Coverage(_) => coverage_cmlp(&self.problem),
            _ => bail!(Unsupported, "no covering LP for this instance; supply one under \"cmlp\""),
        }
    }
}

/// A mechanism with the support it was verified on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismFile {
    pub mechanism: Mechanism,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<BoundedSupport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_support: Option<ProductSupport>,
}

impl MechanismFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mechanisms serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("mechanism JSON: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = r#"{
        "problem": { "preset": "single_item", "sellers": 2 },
        "distribution": [ { "costs": [["1"], ["2"]], "prob": "1" } ]
    }"#;

    #[test]
    fn loads_preset() {
        let inst = Instance::from_json(SINGLE).unwrap();
        assert_eq!(inst.problem.n(), 2);
        assert_eq!(inst.kappa, Rational::zero());
        assert!(inst.cmlp().is_ok());
    }

    #[test]
    fn rejects_zero_denominator() {
        let bad = SINGLE.replace("\"1\" }", "\"1/0\" }");
        assert!(matches!(Instance::from_json(&bad), Err(Error::Input(_))));
    }

    #[test]
    fn rejects_unknown_preset() {
        let bad = SINGLE.replace("single_item", "knapsack");
        assert!(matches!(Instance::from_json(&bad), Err(Error::Input(_))));
    }

    #[test]
    fn table_preset() {
        let text = r#"{
            "problem": { "preset": "table",
                "players": [ {"name": "a", "objects": ["x"]}, {"name": "b", "objects": ["y"]} ],
                "rows": [ {"allocation": [[0], []], "cost": "1"}, {"allocation": [[], [0]], "cost": "2"},
                          {"allocation": [[0], [0]], "cost": "1/2"} ] },
            "distribution": [ { "costs": [["0"], ["1"]], "prob": "1" } ],
            "kappa": "1"
        }"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.problem.public_cost(&Allocation::from_sets(&[vec![0], vec![0]])).finite(), Some(&Rational::new(1, 2)));
        assert!(matches!(inst.cmlp(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn instance_round_trip() {
        let file = InstanceFile::from_json(SINGLE).unwrap();
        assert_eq!(InstanceFile::from_json(&file.to_json()).unwrap(), file);
    }
}
