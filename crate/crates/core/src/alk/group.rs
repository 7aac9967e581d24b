use std::fmt;

use crate::error::{Error, Result};
use crate::surface::SurfaceModel;

/// Order of the fundamental group, as far as the descriptor knows it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pi1Order {
    Finite(u64),
    Infinite,
}

/// Image of the degree homomorphism, the subgroup d*Z of Z. `Generated(0)`
/// is the trivial image; `Unknown` means the descriptor cannot name d.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeImage {
    Generated(u64),
    Unknown,
}

/// Topological facts about the spatial slice that determine the linking
/// coefficient group. Only orientable slices are supported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifoldDescriptor {
    pub dimension: u32,
    pub closed: bool,
    pub orientable: bool,
    pub rational_homology_sphere: bool,
    pub pi1_order: Pi1Order,
    pub degree_image: DegreeImage,
    pub homeo_even_sphere: bool,
}

impl ManifoldDescriptor {
    /// Consistency rules that hold for any actual manifold; descriptors
    /// violating them are user error, not geometry.
    pub fn validate(&self) -> Result<()> {
        if !self.orientable {
            return Err(Error::NonOrientable);
        }
        if self.dimension < 2 {
            return Err(Error::InvalidDescriptor(format!(
                "slice dimension must be at least 2, got {}",
                self.dimension
            )));
        }
        if !self.closed && self.degree_image != DegreeImage::Generated(0) {
            return Err(Error::InvalidDescriptor(
                "a non-closed slice has trivial degree image".into(),
            ));
        }
        if self.homeo_even_sphere
            && (self.dimension % 2 != 0 || !self.closed || !self.rational_homology_sphere)
        {
            return Err(Error::InvalidDescriptor(
                "an even-sphere slice must be even-dimensional, closed, and a rational \
                 homology sphere"
                    .into(),
            ));
        }
        if self.pi1_order == Pi1Order::Finite(0) {
            return Err(Error::InvalidDescriptor(
                "a finite fundamental group has positive order".into(),
            ));
        }
        if self.exceptional_case() {
            if let (Pi1Order::Finite(k), DegreeImage::Generated(d)) =
                (self.pi1_order, self.degree_image)
            {
                if d > 0 && d % k != 0 {
                    return Err(Error::InvalidDescriptor(format!(
                        "the fundamental group order {k} must divide the degree image \
                         generator {d}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The one configuration where the coefficient group can shrink: a
    /// closed odd-dimensional rational homology sphere with finite
    /// fundamental group.
    fn exceptional_case(&self) -> bool {
        self.closed
            && self.dimension % 2 == 1
            && self.rational_homology_sphere
            && matches!(self.pi1_order, Pi1Order::Finite(_))
    }

    /// Descriptor of the slice underlying one of the built-in models.
    pub fn of_model(model: &SurfaceModel) -> Self {
        match model {
            SurfaceModel::FlatPlane => ManifoldDescriptor {
                dimension: 2,
                closed: false,
                orientable: true,
                rational_homology_sphere: false,
                pi1_order: Pi1Order::Finite(1),
                degree_image: DegreeImage::Generated(0),
                homeo_even_sphere: false,
            },
            SurfaceModel::FlatTorus { .. } => ManifoldDescriptor {
                dimension: 2,
                closed: true,
                orientable: true,
                rational_homology_sphere: false,
                pi1_order: Pi1Order::Infinite,
                degree_image: DegreeImage::Generated(0),
                homeo_even_sphere: false,
            },
            SurfaceModel::RoundSphere { .. } => ManifoldDescriptor {
                dimension: 2,
                closed: true,
                orientable: true,
                rational_homology_sphere: true,
                pi1_order: Pi1Order::Finite(1),
                degree_image: DegreeImage::Generated(1),
                homeo_even_sphere: true,
            },
        }
    }
}

/// The group the linking number lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientGroup {
    Integers,
    /// Z/n with n >= 2; n < 2 normalizes away in [`CoefficientGroup::mod_n`].
    ModN(u64),
    Trivial,
    /// The descriptor knows the group is a quotient Z/d but cannot name d;
    /// only the divisibility bound `pi1_divides | d` is recorded.
    UnknownQuotient { pi1_divides: u64 },
}

impl CoefficientGroup {
    /// Z/n with the degenerate moduli folded in: n = 0 is all of Z and
    /// n = 1 is the trivial group.
    pub fn mod_n(n: u64) -> Self {
        match n {
            0 => CoefficientGroup::Integers,
            1 => CoefficientGroup::Trivial,
            n => CoefficientGroup::ModN(n),
        }
    }

    /// Canonical representative of an integer in this group. Unknown
    /// quotients keep the raw integer since no reduction is available.
    pub fn reduce(&self, n: i64) -> i64 {
        match self {
            CoefficientGroup::Integers | CoefficientGroup::UnknownQuotient { .. } => n,
            CoefficientGroup::ModN(m) => n.rem_euclid(*m as i64),
            CoefficientGroup::Trivial => 0,
        }
    }

    /// Whether a raw integer is provably nonzero in this group. Unknown
    /// quotients can never certify: the modulus might divide the value.
    pub fn certainly_nonzero(&self, n: i64) -> bool {
        match self {
            CoefficientGroup::Integers => n != 0,
            CoefficientGroup::ModN(m) => n.rem_euclid(*m as i64) != 0,
            CoefficientGroup::Trivial => false,
            CoefficientGroup::UnknownQuotient { .. } => false,
        }
    }
}

impl fmt::Display for CoefficientGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientGroup::Integers => write!(f, "Z"),
            CoefficientGroup::ModN(n) => write!(f, "Z/{n}"),
            CoefficientGroup::Trivial => write!(f, "0"),
            CoefficientGroup::UnknownQuotient { pi1_divides } => {
                write!(f, "Z/d (d unknown, {pi1_divides} | d)")
            }
        }
    }
}

/// A linking value: an integer representative together with the group it is
/// read in. Values built through [`AlkValue::new`] store the reduced
/// representative, so derived equality is equality in the group (except for
/// unknown quotients, where equal representatives are merely sufficient).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlkValue {
    pub representative: i64,
    pub group: CoefficientGroup,
}

impl AlkValue {
    pub fn new(n: i64, group: CoefficientGroup) -> Self {
        AlkValue {
            representative: group.reduce(n),
            group,
        }
    }

    pub fn is_certainly_nonzero(&self) -> bool {
        self.group.certainly_nonzero(self.representative)
    }
}

impl fmt::Display for AlkValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.representative, self.group)
    }
}

/// The coefficient group determined by the slice topology: the integers,
/// except for closed odd-dimensional rational homology spheres with finite
/// fundamental group, where the degree image divides it down.
pub fn coefficient_group(desc: &ManifoldDescriptor) -> Result<CoefficientGroup> {
    desc.validate()?;
    if !desc.exceptional_case() {
        return Ok(CoefficientGroup::Integers);
    }
    match desc.degree_image {
        DegreeImage::Generated(d) => Ok(CoefficientGroup::mod_n(d)),
        DegreeImage::Unknown => {
            let k = match desc.pi1_order {
                Pi1Order::Finite(k) => k,
                Pi1Order::Infinite => unreachable!("exceptional case requires finite pi1"),
            };
            Ok(CoefficientGroup::UnknownQuotient { pi1_divides: k })
        }
    }
}

/// Whether oppositely oriented fibers stay non-homotopic, i.e. whether a
/// nonzero linking value certifies a genuine link. Fails exactly for slices
/// homeomorphic to an even-dimensional sphere.
pub fn is_good(desc: &ManifoldDescriptor) -> Result<bool> {
    desc.validate()?;
    Ok(!desc.homeo_even_sphere)
}
