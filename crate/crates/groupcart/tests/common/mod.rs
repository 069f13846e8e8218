//! Shared fixtures and independent oracles for the integration tests.

use groupcart::data::Dataset;

/// A plain information-gain CART grown with the same candidate enumeration
/// and tie-break rules as the production tree, implemented independently:
/// recursive, count-based, no weighting machinery.
#[derive(Debug, PartialEq)]
pub enum RefNode {
    Leaf {
        label: u8,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RefNode>,
        right: Box<RefNode>,
    },
}

pub struct RefHyper {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_gain: f64,
}

fn h(labels: &[u8]) -> f64 {
    let p = labels.iter().filter(|&&l| l == 1).count() as f64 / labels.len() as f64;
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn leaf(labels: &[u8]) -> RefNode {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    RefNode::Leaf {
        label: u8::from(pos as f64 / labels.len() as f64 >= 0.5),
    }
}

pub fn reference_cart(d: &Dataset, rows: &[usize], depth: usize, hyper: &RefHyper) -> RefNode {
    let labels: Vec<u8> = rows.iter().map(|&r| d.target()[r]).collect();
    let pure = labels.iter().all(|&l| l == labels[0]);
    if depth >= hyper.max_depth || rows.len() < 2 * hyper.min_samples_leaf || pure {
        return leaf(&labels);
    }

    let mut best: Option<(f64, usize, f64)> = None;
    for (feature, col) in d.columns().iter().enumerate() {
        let mut values: Vec<f64> = rows.iter().map(|&r| col[r]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for pair in values.windows(2) {
            let mut threshold = (pair[0] + pair[1]) / 2.0;
            if !(threshold >= pair[0] && threshold < pair[1]) {
                threshold = pair[0];
            }
            let left: Vec<u8> = rows
                .iter()
                .filter(|&&r| col[r] <= threshold)
                .map(|&r| d.target()[r])
                .collect();
            let right: Vec<u8> = rows
                .iter()
                .filter(|&&r| col[r] > threshold)
                .map(|&r| d.target()[r])
                .collect();
            if left.len() < hyper.min_samples_leaf || right.len() < hyper.min_samples_leaf {
                continue;
            }
            let n = labels.len() as f64;
            let gain = (h(&labels)
                - (left.len() as f64 / n) * h(&left)
                - (right.len() as f64 / n) * h(&right))
            .max(0.0);
            if best.is_none_or(|(b, _, _)| gain > b) {
                best = Some((gain, feature, threshold));
            }
        }
    }
    match best {
        Some((gain, feature, threshold)) if gain >= hyper.min_gain => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .copied()
                .partition(|&i| d.columns()[feature][i] <= threshold);
            RefNode::Split {
                feature,
                threshold,
                left: Box::new(reference_cart(d, &l, depth + 1, hyper)),
                right: Box::new(reference_cart(d, &r, depth + 1, hyper)),
            }
        }
        _ => leaf(&labels),
    }
}

/// Structural equality between a production tree and the reference:
/// same splits (feature and bit-exact threshold) and same leaf labels.
pub fn same_structure(node: &groupcart::tree::TreeNode, reference: &RefNode) -> bool {
    use groupcart::tree::TreeNode;
    match (node, reference) {
        (TreeNode::Leaf { label, .. }, RefNode::Leaf { label: ref_label }) => label == ref_label,
        (
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
                ..
            },
            RefNode::Split {
                feature: rf,
                threshold: rt,
                left: rl,
                right: rr,
            },
        ) => {
            feature == rf
                && threshold.to_bits() == rt.to_bits()
                && same_structure(left, rl)
                && same_structure(right, rr)
        }
        _ => false,
    }
}
