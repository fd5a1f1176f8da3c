//! Roll call data: loading, encoding, and filtering.
//!
//! Votes are encoded +1 (yea), -1 (nay), 0 (absent, present, or not
//! voting); abstentions are never imputed. Two input formats are
//! supported: a self-contained "wide" CSV with one row per legislator,
//! and the two-file long format used by public roll-call archives
//! (a members table plus one record per cast vote).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Legislator {
    pub id: String,
    pub name: String,
    pub party: String,
    pub region: Option<String>,
}

/// The n x m roll call matrix plus member metadata.
///
/// Row order and column order are meaningful and stable: filtering
/// preserves both as subsequences of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteMatrix {
    legislators: Vec<Legislator>,
    vote_ids: Vec<String>,
    values: Array2<i8>,
}

impl VoteMatrix {
    /// Validates entries, dimensions, and id uniqueness.
    pub fn new(
        legislators: Vec<Legislator>,
        vote_ids: Vec<String>,
        values: Array2<i8>,
    ) -> Result<Self> {
        if values.nrows() != legislators.len() || values.ncols() != vote_ids.len() {
            return Err(PdmError::Shape(format!(
                "matrix is {}x{} but there are {} legislators and {} vote ids",
                values.nrows(),
                values.ncols(),
                legislators.len(),
                vote_ids.len()
            )));
        }
        if vote_ids.is_empty() {
            return Err(PdmError::NoVotes);
        }
        if legislators.len() < 2 {
            return Err(PdmError::Degenerate(format!(
                "need at least 2 legislators, got {}",
                legislators.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, leg) in legislators.iter().enumerate() {
            if let Some(prev) = seen.insert(leg.id.clone(), i) {
                return Err(PdmError::DuplicateId {
                    row: prev + 1,
                    id: leg.id.clone(),
                });
            }
        }
        for ((i, j), &v) in values.indexed_iter() {
            if !matches!(v, -1..=1) {
                return Err(PdmError::BadVoteValue {
                    row: i + 1,
                    col: vote_ids[j].clone(),
                    value: v.to_string(),
                });
            }
        }
        Ok(Self {
            legislators,
            vote_ids,
            values,
        })
    }

    pub fn n_legislators(&self) -> usize {
        self.legislators.len()
    }

    pub fn n_votes(&self) -> usize {
        self.vote_ids.len()
    }

    pub fn legislators(&self) -> &[Legislator] {
        &self.legislators
    }

    pub fn vote_ids(&self) -> &[String] {
        &self.vote_ids
    }

    pub fn values(&self) -> &Array2<i8> {
        &self.values
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, i8> {
        self.values.row(i)
    }

    /// The matrix as reals, the form consumed by the spectral pipeline.
    pub fn to_real(&self) -> Array2<f64> {
        self.values.mapv(f64::from)
    }

    /// (#yea, #nay) for a vote column, counting cast votes only.
    pub fn margins(&self, col: usize) -> (usize, usize) {
        let mut yea = 0;
        let mut nay = 0;
        for &v in self.values.column(col) {
            match v {
                1 => yea += 1,
                -1 => nay += 1,
                _ => {}
            }
        }
        (yea, nay)
    }
}

const META_COLS: [&str; 4] = ["id", "name", "party", "region"];

/// Parse the wide CSV format from any reader.
///
/// Expected header: `id,name,party,region,<vote id>...` with vote cells
/// in {1, 0, -1}. Row and column positions in errors are 1-based data
/// rows (the header is row 0).
pub fn read_wide_csv<R: Read>(reader: R) -> Result<VoteMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let fields: Vec<&str> = headers.iter().collect();
    for (i, want) in META_COLS.iter().enumerate() {
        if fields.get(i).copied() != Some(*want) {
            return Err(PdmError::MissingColumn {
                name: (*want).to_string(),
                file: "wide csv".to_string(),
            });
        }
    }
    let vote_ids: Vec<String> = fields[META_COLS.len()..]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if vote_ids.is_empty() {
        return Err(PdmError::NoVotes);
    }
    let expected = META_COLS.len() + vote_ids.len();

    let mut legislators = Vec::new();
    let mut cells: Vec<i8> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        if record.len() != expected {
            return Err(PdmError::RaggedRow {
                row,
                expected,
                found: record.len(),
            });
        }
        let region = record[3].trim();
        legislators.push(Legislator {
            id: record[0].to_string(),
            name: record[1].to_string(),
            party: record[2].to_string(),
            region: if region.is_empty() {
                None
            } else {
                Some(region.to_string())
            },
        });
        for (j, cell) in record.iter().skip(META_COLS.len()).enumerate() {
            let v: i8 = cell.trim().parse().map_err(|_| PdmError::BadVoteValue {
                row,
                col: vote_ids[j].clone(),
                value: cell.to_string(),
            })?;
            if !matches!(v, -1..=1) {
                return Err(PdmError::BadVoteValue {
                    row,
                    col: vote_ids[j].clone(),
                    value: cell.to_string(),
                });
            }
            cells.push(v);
        }
    }

    let n = legislators.len();
    let values = Array2::from_shape_vec((n, vote_ids.len()), cells)
        .map_err(|e| PdmError::Shape(e.to_string()))?;
    VoteMatrix::new(legislators, vote_ids, values)
}

pub fn load_wide_csv<P: AsRef<Path>>(path: P) -> Result<VoteMatrix> {
    read_wide_csv(std::fs::File::open(path)?)
}

/// Serialize to the wide CSV format. `read_wide_csv` round-trips this
/// output bit-exactly.
pub fn write_wide_csv<W: Write>(v: &VoteMatrix, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = META_COLS.to_vec();
    header.extend(v.vote_ids().iter().map(|s| s.as_str()));
    wtr.write_record(&header)?;
    let mut buf = String::new();
    for (i, leg) in v.legislators().iter().enumerate() {
        let mut record: Vec<String> = vec![
            leg.id.clone(),
            leg.name.clone(),
            leg.party.clone(),
            leg.region.clone().unwrap_or_default(),
        ];
        for &cell in v.row(i) {
            buf.clear();
            write!(buf, "{cell}").expect("write to string");
            record.push(buf.clone());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_wide_csv<P: AsRef<Path>>(v: &VoteMatrix, path: P) -> Result<()> {
    write_wide_csv(v, std::fs::File::create(path)?)
}

fn header_index(headers: &csv::StringRecord, names: &[&str], file: &str) -> Result<usize> {
    for name in names {
        if let Some(i) = headers.iter().position(|h| h.eq_ignore_ascii_case(name)) {
            return Ok(i);
        }
    }
    Err(PdmError::MissingColumn {
        name: names[0].to_string(),
        file: file.to_string(),
    })
}

/// Load the long two-file format: a members table plus one record per
/// cast vote, keyed by (legislator id, roll number, cast code).
///
/// Cast codes 1-3 map to +1, 4-6 to -1, everything else (including a
/// missing record) to 0. Columns are ordered by roll number ascending.
pub fn load_voteview<P: AsRef<Path>, Q: AsRef<Path>>(
    members_path: P,
    votes_path: Q,
) -> Result<VoteMatrix> {
    let mut members = csv::Reader::from_reader(std::fs::File::open(members_path)?);
    let headers = members.headers()?.clone();
    let id_col = header_index(&headers, &["icpsr", "id"], "members file")?;
    let name_col = header_index(&headers, &["bioname", "name"], "members file")?;
    let party_col = header_index(&headers, &["party_code", "party"], "members file")?;
    let region_col = header_index(&headers, &["state_abbrev", "state", "region"], "members file").ok();

    let mut legislators = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    for (idx, record) in members.records().enumerate() {
        let record = record?;
        let id = record
            .get(id_col)
            .unwrap_or_default()
            .trim()
            .to_string();
        if let Some(prev) = index_of.insert(id.clone(), legislators.len()) {
            return Err(PdmError::DuplicateId { row: prev + 1, id });
        }
        let _ = idx;
        legislators.push(Legislator {
            id,
            name: record.get(name_col).unwrap_or_default().to_string(),
            party: record.get(party_col).unwrap_or_default().to_string(),
            region: region_col
                .and_then(|c| record.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string),
        });
    }

    let mut votes = csv::Reader::from_reader(std::fs::File::open(votes_path)?);
    let headers = votes.headers()?.clone();
    let vid_col = header_index(&headers, &["icpsr", "id"], "votes file")?;
    let roll_col = header_index(&headers, &["rollnumber", "roll"], "votes file")?;
    let cast_col = header_index(&headers, &["cast_code", "cast"], "votes file")?;

    // (legislator index, roll number) -> encoded vote
    let mut records: HashMap<(usize, i64), i8> = HashMap::new();
    let mut rolls: Vec<i64> = Vec::new();
    for (idx, record) in votes.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        let id = record.get(vid_col).unwrap_or_default().trim();
        let leg = *index_of
            .get(id)
            .ok_or_else(|| PdmError::UnknownLegislator {
                row,
                id: id.to_string(),
            })?;
        let rollnumber: i64 = record
            .get(roll_col)
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| PdmError::BadCell {
                row,
                col: "rollnumber".to_string(),
                msg: format!("not an integer: {:?}", record.get(roll_col).unwrap_or_default()),
            })?;
        let cast: i64 = record
            .get(cast_col)
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| PdmError::BadCell {
                row,
                col: "cast_code".to_string(),
                msg: format!("not an integer: {:?}", record.get(cast_col).unwrap_or_default()),
            })?;
        let encoded = match cast {
            1..=3 => 1,
            4..=6 => -1,
            _ => 0,
        };
        if records.insert((leg, rollnumber), encoded).is_some() {
            return Err(PdmError::DuplicateVote {
                id: id.to_string(),
                rollnumber,
            });
        }
        rolls.push(rollnumber);
    }

    rolls.sort_unstable();
    rolls.dedup();
    if rolls.is_empty() {
        return Err(PdmError::NoVotes);
    }
    let col_of: HashMap<i64, usize> = rolls.iter().enumerate().map(|(j, &r)| (r, j)).collect();

    let mut values = Array2::<i8>::zeros((legislators.len(), rolls.len()));
    for ((leg, roll), encoded) in records {
        values[[leg, col_of[&roll]]] = encoded;
    }
    let vote_ids = rolls.iter().map(|r| r.to_string()).collect();
    VoteMatrix::new(legislators, vote_ids, values)
}

/// Drop every vote whose minority side is strictly below
/// `threshold * n`, where n is the total body size including
/// abstainers. A column exactly at the threshold is retained.
pub fn filter_minority(v: &VoteMatrix, threshold: f64) -> Result<VoteMatrix> {
    if !(0.0..0.5).contains(&threshold) {
        return Err(PdmError::Parameter(format!(
            "minority threshold must be in [0, 0.5), got {threshold}"
        )));
    }
    let cutoff = threshold * v.n_legislators() as f64;
    let keep: Vec<usize> = (0..v.n_votes())
        .filter(|&j| {
            let (yea, nay) = v.margins(j);
            yea.min(nay) as f64 >= cutoff
        })
        .collect();
    if keep.is_empty() {
        return Err(PdmError::AllVotesFiltered { threshold });
    }
    let vote_ids: Vec<String> = keep.iter().map(|&j| v.vote_ids[j].clone()).collect();
    let mut values = Array2::<i8>::zeros((v.n_legislators(), keep.len()));
    for (out, &j) in keep.iter().enumerate() {
        values.column_mut(out).assign(&v.values.column(j));
    }
    VoteMatrix::new(v.legislators.clone(), vote_ids, values)
}
