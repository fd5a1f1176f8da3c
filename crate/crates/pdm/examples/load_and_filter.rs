//! Parse a wide-format roll call CSV and drop lopsided votes.
//!
//! ```text
//! cargo run --example load_and_filter
//! ```

use pdm::rollcall::{filter_minority, read_wide_csv};

fn main() -> pdm::Result<()> {
    // id,name,party,region followed by one column per roll call;
    // votes are 1 (yea), -1 (nay), 0 (absent/present).
    let csv = "\
id,name,party,region,v1,v2,v3,v4
s01,Aldrin,A,west,1,-1,1,1
s02,Basket,A,west,1,-1,1,1
s03,Chavez,A,south,1,-1,-1,1
s04,Dillon,B,south,-1,1,-1,1
s05,Eklund,B,north,-1,1,1,1
s06,Farrow,B,north,-1,1,-1,1
";
    let v = read_wide_csv(csv.as_bytes())?;
    println!(
        "loaded {} legislators x {} votes",
        v.n_legislators(),
        v.n_votes()
    );
    for j in 0..v.n_votes() {
        let (yea, nay) = v.margins(j);
        println!("  {}: {yea} yea / {nay} nay", v.vote_ids()[j]);
    }

    // v4 is 6-0: below a 10% minority share it carries no signal.
    let filtered = filter_minority(&v, 0.10)?;
    println!(
        "after filtering at 10%: {} votes remain: {:?}",
        filtered.n_votes(),
        filtered.vote_ids()
    );
    Ok(())
}
