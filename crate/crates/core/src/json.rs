//! JSON encodings.
//!
//! A rational is `[num, den]` with `den > 0`; each part is a JSON integer
//! when it fits in `i64` and a decimal string otherwise. On input a bare
//! integer or a `"num/den"` string is also accepted. Per-cone tables are
//! objects keyed by the decimal cone index; transitions are keyed `"τ,σ"`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::fan::Fan;
use crate::kaneyama::{EquivalenceWitness, GroupTag, KaneyamaData};
use crate::lattice::{Character, Rational, RationalMatrix};

struct IntOut<'a>(&'a BigInt);

impl Serialize for IntOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct RationalOut<'a>(&'a Rational);

impl Serialize for RationalOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&IntOut(self.0.numer()))?;
        seq.serialize_element(&IntOut(self.0.denom()))?;
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntIn {
    Int(i64),
    Text(String),
}

impl IntIn {
    fn to_bigint<E: de::Error>(&self) -> Result<BigInt, E> {
        match self {
            IntIn::Int(v) => Ok(BigInt::from(*v)),
            IntIn::Text(t) => t.trim().parse().map_err(|_| E::custom(format!("`{t}` is not an integer"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalIn {
    Pair(IntIn, IntIn),
    Int(i64),
    Text(String),
}

fn parse_rational<E: de::Error>(r: RationalIn) -> Result<Rational, E> {
    let (n, d) = match r {
        RationalIn::Pair(n, d) => (n.to_bigint()?, d.to_bigint()?),
        RationalIn::Int(v) => (BigInt::from(v), BigInt::from(1)),
        RationalIn::Text(t) => match t.split_once('/') {
            Some((n, d)) => (IntIn::Text(n.into()).to_bigint()?, IntIn::Text(d.into()).to_bigint()?),
            None => (IntIn::Text(t).to_bigint()?, BigInt::from(1)),
        },
    };
    if d.is_zero() {
        return Err(E::custom("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

impl Serialize for RationalMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<RationalOut<'_>>> =
            (0..self.rows()).map(|i| (0..self.cols()).map(|j| RationalOut(self.get(i, j))).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw: Vec<Vec<RationalIn>> = Vec::deserialize(de)?;
        let rows = raw
            .into_iter()
            .map(|row| row.into_iter().map(parse_rational::<D::Error>).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        RationalMatrix::from_rows(rows).map_err(de::Error::custom)
    }
}

/// Serde adapter for a `Vec<T>` indexed by cone, written as an object keyed
/// `"0"`, `"1"`, ... in index order. Input keys must be exactly `0..m`.
pub mod cone_map {
    use super::*;

    pub fn serialize<T: Serialize, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(v.len()))?;
        for (k, x) in v.iter().enumerate() {
            map.serialize_entry(&k.to_string(), x)?;
        }
        map.end()
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(de: D) -> Result<Vec<T>, D::Error> {
        let raw: BTreeMap<String, T> = BTreeMap::deserialize(de)?;
        indexed(raw).map_err(de::Error::custom)
    }

    pub(crate) fn indexed<T>(raw: BTreeMap<String, T>) -> Result<Vec<T>, String> {
        let mut keyed = BTreeMap::new();
        for (k, v) in raw {
            let i: usize = k.trim().parse().map_err(|_| format!("cone key `{k}` is not an index"))?;
            if keyed.insert(i, v).is_some() {
                return Err(format!("cone key {i} repeated"));
            }
        }
        let n = keyed.len();
        if let Some((&i, _)) = keyed.iter().next_back().filter(|(&i, _)| i + 1 != n) {
            return Err(format!("cone keys must be 0..{n}, found {i}"));
        }
        Ok(keyed.into_values().collect())
    }
}

fn parse_pair(key: &str) -> Result<(usize, usize), String> {
    let (t, s) = key.split_once(',').ok_or_else(|| format!("transition key `{key}` is not `tau,sigma`"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("transition key `{key}` is not `tau,sigma`"));
    Ok((parse(t)?, parse(s)?))
}

struct TransitionsOut<'a>(&'a KaneyamaData);

impl Serialize for TransitionsOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m = self.0.num_cones();
        let mut map = s.serialize_map(Some(m * m))?;
        for t in 0..m {
            for sg in 0..m {
                map.serialize_entry(&format!("{t},{sg}"), self.0.transition(t, sg))?;
            }
        }
        map.end()
    }
}

struct XiOut<'a>(&'a KaneyamaData);

impl Serialize for XiOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        cone_map::serialize(self.0.all_xi(), s)
    }
}

impl Serialize for KaneyamaData {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("group", &self.group())?;
        map.serialize_entry("fan", self.fan())?;
        map.serialize_entry("xi", &XiOut(self))?;
        map.serialize_entry("P", &TransitionsOut(self))?;
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    group: GroupTag,
    fan: Fan,
    #[serde(with = "cone_map")]
    xi: Vec<Vec<Character>>,
    #[serde(rename = "P", default)]
    trans: BTreeMap<String, RationalMatrix>,
}

impl<'de> Deserialize<'de> for KaneyamaData {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawData::deserialize(de)?;
        let mut given = BTreeMap::new();
        for (k, p) in raw.trans {
            given.insert(parse_pair(&k).map_err(de::Error::custom)?, p);
        }
        KaneyamaData::from_partial(raw.fan, raw.group, raw.xi, given).map_err(de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct WitnessRepr {
    #[serde(with = "cone_map")]
    eta: Vec<Vec<usize>>,
    #[serde(with = "cone_map")]
    beta: Vec<RationalMatrix>,
}

impl Serialize for EquivalenceWitness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WitnessRepr { eta: self.eta.clone(), beta: self.beta.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EquivalenceWitness {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let r = WitnessRepr::deserialize(de)?;
        Ok(EquivalenceWitness { eta: r.eta, beta: r.beta })
    }
}

/// Error of [`from_str`], carrying the line and column of the failure.
#[derive(Debug)]
pub struct JsonError(pub serde_json::Error);

impl fmt::Display for JsonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for JsonError {}

pub fn from_str<T: de::DeserializeOwned>(s: &str) -> Result<T, JsonError> {
    serde_json::from_str(s).map_err(JsonError)
}

/// Compact JSON with a trailing newline.
pub fn to_string<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn to_string_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kaneyama::tangent_frame_data;
    use crate::lattice::{q, qq};

    #[test]
    fn matrix_round_trip() {
        let m = RationalMatrix::from_rows(vec![vec![qq(-1, 3), q(0)], vec![q(7), qq(5, 2)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[-1,3],[0,1]],[[7,1],[5,2]]]");
        assert_eq!(serde_json::from_str::<RationalMatrix>(&s).unwrap(), m);
    }

    #[test]
    fn big_entries_become_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let m = RationalMatrix::diagonal(&[Rational::new(big.clone(), BigInt::from(1))]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"[[["123456789012345678901234567890",1]]]"#);
        assert_eq!(serde_json::from_str::<RationalMatrix>(&s).unwrap(), m);
    }

    #[test]
    fn lenient_entries() {
        let m: RationalMatrix = serde_json::from_str(r#"[[1, "2/4"], [[3, -6], "5"]]"#).unwrap();
        assert_eq!(m, RationalMatrix::from_rows(vec![vec![q(1), qq(1, 2)], vec![qq(-1, 2), q(5)]]).unwrap());
        assert!(serde_json::from_str::<RationalMatrix>("[[[1,0]]]").is_err());
        assert!(serde_json::from_str::<RationalMatrix>("[[1],[1,2]]").is_err());
    }

    #[test]
    fn data_round_trip() {
        let d = tangent_frame_data(&Fan::projective_space(2).unwrap()).unwrap();
        let s = to_string(&d);
        let back: KaneyamaData = from_str(&s).unwrap();
        assert_eq!(back, d);
        assert_eq!(to_string(&back), s);
        assert!(s.starts_with(r#"{"group":{"kind":"GL","rank":2},"fan":{"dim":2"#));
    }

    #[test]
    fn partial_transitions_parse() {
        let s = r#"{"group":{"kind":"GL","rank":1},
            "fan":{"dim":1,"rays":[[-1],[1]],"max_cones":[[1],[0]]},
            "xi":{"0":[[0]],"1":[[0]]},
            "P":{"1,0":[[[1,1]]]}}"#;
        let d: KaneyamaData = from_str(s).unwrap();
        assert!(d.transition(0, 1).is_identity());
        let missing = s.replace(r#""P":{"1,0":[[[1,1]]]}"#, r#""P":{}"#);
        assert!(from_str::<KaneyamaData>(&missing).unwrap_err().to_string().contains("do not connect"));
        let gap = s.replace(r#""1":[[0]]"#, r#""2":[[0]]"#);
        assert!(from_str::<KaneyamaData>(&gap).is_err());
    }

    #[test]
    fn errors_carry_position() {
        let e = from_str::<KaneyamaData>("{\n\"group\": 3}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn witness_round_trip() {
        let w = EquivalenceWitness::identity(3, 2);
        let s = to_string(&w);
        assert_eq!(from_str::<EquivalenceWitness>(&s).unwrap(), w);
    }
}
