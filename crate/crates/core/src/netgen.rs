//! Round networks: who lends to whom, how much, and the shock draws.
//!
//! Agents are indexed safe group first (`0..n1`) then risky group
//! (`n1..n1 + n2`); borrower `j` is agent `n1 + j`. Every agent may lend to
//! every risky agent other than itself, each link present with probability
//! `link_probability`.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::model::{derive, MarketParams};

/// How the peer loan size is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PeerWeighting {
    /// Divide the lent amount over the `n2 - 1` possible peers, so that the
    /// expected total borrowed matches the liability exactly.
    #[default]
    SelfExcluded,
    /// Divide by `n (1 - eps)`, counting the borrower itself.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    Complete,
    Sparse {
        /// Creditor agent indices of each borrower.
        creditors_of: Vec<Vec<u32>>,
        /// Borrower indices owing each agent (transposed index).
        debtors_of: Vec<Vec<u32>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiabilityGraph {
    pub n1: usize,
    pub n2: usize,
    pub eps: f64,
    /// Liability of each risky agent, interest included.
    pub liability: f64,
    /// Amount lent on one link by a safe creditor.
    pub safe_edge_weight: f64,
    /// Amount lent on one link by a risky creditor.
    pub peer_edge_weight: f64,
    /// Share of a borrower's payment due on one link: `weight (1 + r_b) / y`.
    pub safe_share: f64,
    pub peer_share: f64,
    pub topology: Topology,
}

impl LiabilityGraph {
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    /// Creditors of borrower `j` with the amount each lent.
    pub fn creditors(&self, j: usize) -> Vec<(usize, f64)> {
        let me = self.n1 + j;
        let weight = |i: usize| {
            if i < self.n1 {
                self.safe_edge_weight
            } else {
                self.peer_edge_weight
            }
        };
        match &self.topology {
            Topology::Complete => (0..self.n()).filter(|&i| i != me).map(|i| (i, weight(i))).collect(),
            Topology::Sparse { creditors_of, .. } => {
                creditors_of[j].iter().map(|&i| (i as usize, weight(i as usize))).collect()
            }
        }
    }

    pub fn in_degree(&self, j: usize) -> usize {
        match &self.topology {
            Topology::Complete => self.n() - 1,
            Topology::Sparse { creditors_of, .. } => creditors_of[j].len(),
        }
    }
}

fn weights(
    params: &MarketParams,
    n1: usize,
    n2: usize,
    weighting: PeerWeighting,
) -> Result<(f64, f64, f64, f64)> {
    let n = (n1 + n2) as f64;
    let eps = if n1 + n2 == 0 { 1.0 } else { n1 as f64 / n };
    let dq = derive(params, eps)?;
    let p = params.link_probability;
    let w = params.wealth;
    let a = params.interbank_fraction;
    let safe = w / (n * p);
    let peer = if n2 < 2 {
        0.0
    } else {
        match weighting {
            PeerWeighting::SelfExcluded => a * w * (1.0 + eps) / ((n2 - 1) as f64 * p * (1.0 - a)),
            PeerWeighting::Literal => a * w * (1.0 + eps) / (n * p * (1.0 - a) * (1.0 - eps)),
        }
    };
    Ok((eps, dq.liability, safe, peer))
}

fn assemble(
    params: &MarketParams,
    n1: usize,
    n2: usize,
    weighting: PeerWeighting,
    topology: Topology,
) -> Result<LiabilityGraph> {
    let (eps, y, safe, peer) = weights(params, n1, n2, weighting)?;
    let scale = if y > 0.0 { (1.0 + params.borrow_rate) / y } else { 0.0 };
    Ok(LiabilityGraph {
        n1,
        n2,
        eps,
        liability: y,
        safe_edge_weight: safe,
        peer_edge_weight: peer,
        safe_share: safe * scale,
        peer_share: peer * scale,
        topology,
    })
}

fn transpose(n: usize, creditors_of: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut debtors_of = vec![Vec::new(); n];
    for (j, cs) in creditors_of.iter().enumerate() {
        for &i in cs {
            debtors_of[i as usize].push(j as u32);
        }
    }
    debtors_of
}

/// Complete network, or the empty one when nobody borrows.
fn dense(params: &MarketParams, n1: usize, n2: usize, weighting: PeerWeighting) -> Result<LiabilityGraph> {
    let topology = if n2 == 0 {
        Topology::Sparse { creditors_of: Vec::new(), debtors_of: vec![Vec::new(); n1] }
    } else {
        Topology::Complete
    };
    assemble(params, n1, n2, weighting, topology)
}

/// Draws a round network with independent links.
pub fn sample_network<R: Rng + ?Sized>(
    params: &MarketParams,
    n1: usize,
    n2: usize,
    weighting: PeerWeighting,
    rng: &mut R,
) -> Result<LiabilityGraph> {
    let p = params.link_probability;
    let n = n1 + n2;
    if p >= 1.0 || n2 == 0 {
        return dense(params, n1, n2, weighting);
    }
    let skip = Geometric::new(p).expect("link probability in (0, 1)");
    let mut creditors_of = Vec::with_capacity(n2);
    for j in 0..n2 {
        let me = n1 + j;
        let mut cs = Vec::new();
        // Walk the n - 1 candidate creditors, jumping over absent links.
        let mut k = skip.sample(rng);
        while k < (n - 1) as u64 {
            let i = if (k as usize) < me { k as usize } else { k as usize + 1 };
            cs.push(i as u32);
            k += 1 + skip.sample(rng);
        }
        creditors_of.push(cs);
    }
    let debtors_of = transpose(n, &creditors_of);
    assemble(params, n1, n2, weighting, Topology::Sparse { creditors_of, debtors_of })
}

/// Link indicator that depends only on the two agents' identities, so that
/// surviving agents keep their links from round to round.
pub fn fixed_link(link_seed: u64, borrower_id: u64, creditor_id: u64, p: f64) -> bool {
    if p >= 1.0 {
        return true;
    }
    let mut h = Sha256::new();
    h.update(link_seed.to_le_bytes());
    h.update(borrower_id.to_le_bytes());
    h.update(creditor_id.to_le_bytes());
    let d = h.finalize();
    let x = u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"));
    ((x >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p
}

/// Network whose links are fixed per pair of agent identities; `ids` holds
/// the identity of every agent in index order.
pub fn sample_network_fixed(
    params: &MarketParams,
    n1: usize,
    n2: usize,
    ids: &[u64],
    link_seed: u64,
    weighting: PeerWeighting,
) -> Result<LiabilityGraph> {
    let p = params.link_probability;
    let n = n1 + n2;
    if p >= 1.0 || n2 == 0 {
        return dense(params, n1, n2, weighting);
    }
    assert_eq!(ids.len(), n, "one identity per agent");
    let creditors_of: Vec<Vec<u32>> = (0..n2)
        .map(|j| {
            let me = n1 + j;
            (0..n)
                .filter(|&i| i != me && fixed_link(link_seed, ids[me], ids[i], p))
                .map(|i| i as u32)
                .collect()
        })
        .collect();
    let debtors_of = transpose(n, &creditors_of);
    assemble(params, n1, n2, weighting, Topology::Sparse { creditors_of, debtors_of })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockVector {
    pub proceeds: Vec<f64>,
    pub up: Vec<bool>,
}

pub fn sample_shocks<R: Rng + ?Sized>(
    params: &MarketParams,
    n2: usize,
    eps: f64,
    rng: &mut R,
) -> Result<ShockVector> {
    let dq = derive(params, eps)?;
    let up: Vec<bool> = (0..n2).map(|_| rng.random_bool(params.up_probability)).collect();
    let proceeds = up
        .iter()
        .map(|&u| if u { dq.proceeds_up } else { dq.proceeds_down })
        .collect();
    Ok(ShockVector { proceeds, up })
}
