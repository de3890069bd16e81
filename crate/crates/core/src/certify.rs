//! The matrix of `T_{m^2}` on the invariant space, the block matrix
//! `A = [[M - psi(m) m^(s-1) I, -m^(2s-2) I], [I, 0]]`, its orders in `PGL` and
//! `GL` over `Z/l^jZ`, and certificates recording the resulting congruences.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, inv_mod, mul_mod, multiplicative_order, pow_mod};
use crate::error::{Error, Result};
use crate::hecke::{hecke_scalars, hecke_t, recurrence_matrices, HeckeContext};
use crate::matrix::ModMatrix;
use crate::params::{compute_params, CharacterSpec, CongruenceParams};
use crate::qseries::Modulus;
use crate::spaces::{basis_a_with_margin, sturm_precision, SpaceBasis, DEFAULT_MARGIN};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Default cap on the number of matrix powers tried when searching for orders.
pub const DEFAULT_ORDER_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeMatrixRecord {
    pub p: u64,
    pub ell: u64,
    pub j: u32,
    pub m: u64,
    pub s: i64,
    pub dim: usize,
    pub modulus: u64,
    /// Column `c` holds the coordinates of `f_c | T_{m^2}` in the basis.
    pub matrix: ModMatrix,
    pub residual_checked: bool,
    /// Coefficients of each `f | T_{m^2}` checked against the basis.
    pub precision_used: usize,
}

impl HeckeMatrixRecord {
    /// The matrix `M` with `f | T_{m^2} = M f` for the column vector of basis forms.
    pub fn row_action(&self) -> ModMatrix {
        self.matrix.transpose()
    }

    pub fn character(&self) -> CharacterSpec {
        CharacterSpec::Quadratic {
            discriminant: -(self.p as i64),
        }
    }

    pub fn psi_m(&self) -> i8 {
        self.character().value(self.m)
    }
}

/// Hecke context of the ambient space `M_s(Gamma0(p D^2), (-p / .))`.
pub fn ambient_context(params: &CongruenceParams, modulus: Option<Modulus>) -> HeckeContext {
    HeckeContext {
        weight: params.s,
        level: params.p * (params.d * params.d) as u64,
        character: CharacterSpec::Quadratic {
            discriminant: -(params.p as i64),
        },
        modulus,
    }
}

fn check_hecke_prime(params: &CongruenceParams, m: u64) -> Result<()> {
    if m < 5 || !crate::arith::is_prime(m) || m == params.ell || m == params.p {
        return Err(Error::InvalidParameters(format!(
            "m = {m} must be a prime >= 5 distinct from l = {} and p = {}",
            params.ell, params.p
        )));
    }
    Ok(())
}

/// Precision a basis of the invariant space needs so that `T_{m^2}` images
/// are known through the Sturm bound of the ambient space plus `margin`.
pub fn hecke_input_precision(params: &CongruenceParams, m: u64, margin: usize) -> usize {
    let level = params.p * (params.d * params.d) as u64;
    let out = sturm_precision(params.s as u64, level) + margin;
    (m * m) as usize * out
}

pub fn hecke_matrix_on_a(params: &CongruenceParams, m: u64) -> Result<HeckeMatrixRecord> {
    hecke_matrix_on_a_with_margin(params, m, DEFAULT_MARGIN)
}

pub fn hecke_matrix_on_a_with_margin(
    params: &CongruenceParams,
    m: u64,
    margin: usize,
) -> Result<HeckeMatrixRecord> {
    check_hecke_prime(params, m)?;
    let md = Modulus::new(params.ell_j as u64)?;
    let prec = hecke_input_precision(params, m, margin);
    let basis = basis_a_with_margin(params, prec, Some(md), margin)?;
    hecke_matrix_for_basis(params, &basis, m)
}

/// Coordinates of `T_{m^2} f` for each element `f` of a given basis.
pub fn hecke_matrix_for_basis(
    params: &CongruenceParams,
    basis: &SpaceBasis,
    m: u64,
) -> Result<HeckeMatrixRecord> {
    check_hecke_prime(params, m)?;
    let md = basis
        .modulus
        .ok_or_else(|| Error::InvalidParameters("Hecke matrices are computed modulo l^j".into()))?;
    let ctx = ambient_context(params, Some(md));
    let sturm = sturm_precision(params.s as u64, ctx.level);
    let available = basis.prec / (m * m) as usize;
    if available < sturm {
        return Err(Error::InsufficientPrecision {
            context: format!("T_{{{m}^2}} on the invariant space"),
            needed: sturm * (m * m) as usize,
            available: basis.prec,
        });
    }
    let image = |f: &crate::QExpansion| -> Result<Vec<i128>> {
        basis.coordinates(&hecke_t(f, m * m, &ctx)?)
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<i128>> = {
        use rayon::prelude::*;
        basis
            .elements
            .par_iter()
            .map(image)
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<i128>> = basis.elements.iter().map(image).collect::<Result<_>>()?;
    let row_action = ModMatrix::from_rows(&rows, md.get())?;
    Ok(HeckeMatrixRecord {
        p: params.p,
        ell: params.ell,
        j: params.j,
        m,
        s: params.s,
        dim: basis.dim(),
        modulus: md.get(),
        matrix: row_action.transpose(),
        residual_checked: true,
        precision_used: available,
    })
}

/// `[[M - psi(m) m^(s-1) I, -m^(2s-2) I], [I, 0]]` for the row-action `M`.
pub fn build_a(record: &HeckeMatrixRecord) -> Result<ModMatrix> {
    let md = record.modulus;
    let d = record.dim;
    let (a, b) = hecke_scalars(record.s, record.psi_m(), record.m, md)?;
    let m1 = record.row_action().sub(&ModMatrix::scalar(d, a, md));
    Ok(ModMatrix::block(
        &m1,
        &ModMatrix::scalar(d, b, md).scale(-1),
        &ModMatrix::identity(d, md),
        &ModMatrix::zeros(d, md),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixOrders {
    /// Least `J >= 1` with `A^J = c I`.
    pub pgl_order: u64,
    pub scalar: u64,
    /// Least `N >= 1` with `A^N = I`, equal to `J` times the order of `c`.
    pub gl_order: u64,
}

/// Sequential search for the projective order, resumable between calls.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderSearch {
    pub base: ModMatrix,
    pub power: ModMatrix,
    pub exponent: u64,
}

impl OrderSearch {
    pub fn new(a: &ModMatrix) -> Result<Self> {
        if !a.is_invertible() {
            return Err(Error::NotInvertible(a.modulus()));
        }
        Ok(OrderSearch {
            base: a.clone(),
            power: a.clone(),
            exponent: 1,
        })
    }

    /// Advances until `A^i` is scalar or `i` would exceed `cap`.
    pub fn run(&mut self, cap: u64) -> Result<(u64, u64)> {
        loop {
            if let Some(c) = self.power.scalar_value() {
                return Ok((self.exponent, c));
            }
            if self.exponent >= cap {
                return Err(Error::OrderCapExceeded {
                    cap,
                    reached: self.exponent,
                });
            }
            self.power = self.power.mul(&self.base);
            self.exponent += 1;
        }
    }
}

/// Finishes an order search: `N = J ord(c)`, confirmed by explicit powering.
pub fn finish_orders(a: &ModMatrix, pgl_order: u64, scalar: u64) -> Result<MatrixOrders> {
    let md = a.modulus();
    let ord_c = multiplicative_order(scalar, md).ok_or(Error::NotInvertible(md))?;
    let gl_order = pgl_order * ord_c;
    if !a.pow(gl_order).is_identity() {
        return Err(Error::NonzeroResidual {
            context: format!("A^{gl_order} is not the identity"),
            index: 0,
        });
    }
    Ok(MatrixOrders {
        pgl_order,
        scalar,
        gl_order,
    })
}

pub fn matrix_orders(a: &ModMatrix, cap: u64) -> Result<MatrixOrders> {
    let mut search = OrderSearch::new(a)?;
    let (j, c) = search.run(cap)?;
    finish_orders(a, j, c)
}

/// Matrix-level consequences of the orders, checked through the recurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderIdentities {
    /// `M_{vJ-1} = 0` for `v = 1, 2`.
    pub vanishing: bool,
    /// `M_{vJ-2} = -c^v m^-(2s-2) I` for `v = 1, 2`.
    pub penultimate: bool,
    /// `M_N = I`, `N_N = 0`, `O_N = 0`.
    pub periodic: bool,
}

impl OrderIdentities {
    pub fn all(&self) -> bool {
        self.vanishing && self.penultimate && self.periodic
    }
}

pub fn order_identities(
    record: &HeckeMatrixRecord,
    orders: &MatrixOrders,
) -> Result<OrderIdentities> {
    let md = record.modulus;
    let d = record.dim;
    let row = record.row_action();
    let (_, b) = hecke_scalars(record.s, record.psi_m(), record.m, md)?;
    let b_inv = inv_mod(b, md).ok_or(Error::NotInvertible(md))?;
    let at = |i: u64| recurrence_matrices(&row, record.s, record.psi_m(), record.m, i);
    let mut vanishing = true;
    let mut penultimate = true;
    for v in 1..=2u64 {
        let j = orders.pgl_order * v;
        vanishing &= at(j - 1)?.m_i == ModMatrix::zeros(d, md);
        if j >= 2 {
            let cv = pow_mod(orders.scalar, v, md);
            let expected = ModMatrix::scalar(d, mul_mod(cv, b_inv, md), md).scale(-1);
            penultimate &= at(j - 2)?.m_i == expected;
        }
    }
    let n = at(orders.gl_order)?;
    let periodic =
        n.m_i.is_identity() && n.n_i == ModMatrix::zeros(d, md) && n.o_i == ModMatrix::zeros(d, md);
    Ok(OrderIdentities {
        vanishing,
        penultimate,
        periodic,
    })
}

fn render_modulus(ell: u64, j: u32) -> String {
    if j == 1 {
        ell.to_string()
    } else {
        format!("{ell}^{j}")
    }
}

/// `p_[1,p]((l^j m^(2vJ-1) n + 1)/D) = 0 (mod l^j)` for `v >= 1`, `m` not dividing `n`.
pub fn vanishing_statement(params: &CongruenceParams, m: u64, pgl_order: u64) -> String {
    let lj = render_modulus(params.ell, params.j);
    format!(
        "p_[1,{p}](({lj}*{m}^({e}v-1)*n + 1)/{d}) == 0 (mod {lj}) for all v >= 1 and n >= 1 with {m} not dividing n",
        p = params.p,
        e = 2 * pgl_order,
        d = params.d
    )
}

/// `p_[1,p]((l^j m^w n + 1)/D) = p_[1,p]((l^j m^(2N+w) n + 1)/D) (mod l^j)`.
pub fn periodic_statement(params: &CongruenceParams, m: u64, gl_order: u64) -> String {
    let lj = render_modulus(params.ell, params.j);
    format!(
        "p_[1,{p}](({lj}*{m}^w*n + 1)/{d}) == p_[1,{p}](({lj}*{m}^({e}+w)*n + 1)/{d}) (mod {lj}) for all w, n >= 0",
        p = params.p,
        e = 2 * gl_order,
        d = params.d
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: u64,
    pub ell: u64,
    pub j: u32,
    pub m: u64,
    pub s: i64,
    pub dim: usize,
    pub modulus: u64,
    /// Hecke matrix rows; column `c` holds the coordinates of `f_c | T_{m^2}`.
    pub matrix: Vec<Vec<u64>>,
    pub block_matrix: Vec<Vec<u64>>,
    pub scalar_c: u64,
    #[serde(rename = "order_pgl_J")]
    pub order_pgl_j: u64,
    #[serde(rename = "order_gl_N")]
    pub order_gl_n: u64,
    pub congruence_vanishing: String,
    pub congruence_periodic: String,
    pub precision: usize,
    pub order_cap: u64,
    pub tool_version: String,
    pub created_at: String,
}

impl Certificate {
    pub fn file_name(&self) -> String {
        cert_file_name(self.p, self.ell, self.j, self.m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn cert_file_name(p: u64, ell: u64, j: u32, m: u64) -> String {
    format!("cert_p{p}_l{ell}_j{j}_m{m}.json")
}

pub fn emit_certificate(
    params: &CongruenceParams,
    record: &HeckeMatrixRecord,
    a: &ModMatrix,
    orders: &MatrixOrders,
    order_cap: u64,
) -> Certificate {
    Certificate {
        p: record.p,
        ell: record.ell,
        j: record.j,
        m: record.m,
        s: record.s,
        dim: record.dim,
        modulus: record.modulus,
        matrix: record.matrix.rows(),
        block_matrix: a.rows(),
        scalar_c: orders.scalar,
        order_pgl_j: orders.pgl_order,
        order_gl_n: orders.gl_order,
        congruence_vanishing: vanishing_statement(params, record.m, orders.pgl_order),
        congruence_periodic: periodic_statement(params, record.m, orders.gl_order),
        precision: record.precision_used,
        order_cap,
        tool_version: TOOL_VERSION.to_string(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

/// Options for a full certification run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertifyOptions {
    pub margin: usize,
    pub order_cap: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            margin: DEFAULT_MARGIN,
            order_cap: DEFAULT_ORDER_CAP,
        }
    }
}

/// Everything a certification run produces.
#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub params: CongruenceParams,
    pub record: HeckeMatrixRecord,
    pub block: ModMatrix,
    pub orders: MatrixOrders,
    pub identities: OrderIdentities,
    pub certificate: Certificate,
}

pub fn certify(p: u64, ell: u64, j: u32, m: u64, opts: CertifyOptions) -> Result<CertifyOutcome> {
    let params = compute_params(p, ell, j)?;
    let record = hecke_matrix_on_a_with_margin(&params, m, opts.margin)?;
    let block = build_a(&record)?;
    let orders = matrix_orders(&block, opts.order_cap)?;
    let identities = order_identities(&record, &orders)?;
    if !identities.all() {
        return Err(Error::NonzeroResidual {
            context: "matrix identities implied by the orders failed".into(),
            index: 0,
        });
    }
    let certificate = emit_certificate(&params, &record, &block, &orders, opts.order_cap);
    Ok(CertifyOutcome {
        params,
        record,
        block,
        orders,
        identities,
        certificate,
    })
}

/// A directory of certificates, one file per `(p, l, j, m)`, written atomically.
#[derive(Clone, Debug)]
pub struct CertStore {
    dir: PathBuf,
}

impl CertStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CertStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, p: u64, ell: u64, j: u32, m: u64) -> PathBuf {
        self.dir.join(cert_file_name(p, ell, j, m))
    }

    pub fn load(&self, p: u64, ell: u64, j: u32, m: u64) -> Result<Option<Certificate>> {
        let path = self.path_for(p, ell, j, m);
        match fs::read_to_string(&path) {
            Ok(s) => Ok(Some(Certificate::from_json(&s)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, cert: &Certificate) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(cert.file_name());
        let tmp = self
            .dir
            .join(format!(".{}.tmp{}", cert.file_name(), std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(cert.to_json()?.as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Certificates currently in the store, sorted by file name.
    pub fn list(&self) -> Result<Vec<Certificate>> {
        let mut names: Vec<PathBuf> = match fs::read_dir(&self.dir) {
            Ok(rd) => rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("cert_") && n.ends_with(".json"))
                })
                .collect(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        names.sort();
        names
            .into_iter()
            .map(|p| Certificate::from_json(&fs::read_to_string(p)?))
            .collect()
    }
}

/// Re-derives `A^J = c I` and `A^N = I` from a certificate's block matrix.
pub fn certificate_consistent(cert: &Certificate) -> Result<bool> {
    let a = ModMatrix::from_rows(
        &cert
            .block_matrix
            .iter()
            .map(|r| r.iter().map(|&v| v as i128).collect())
            .collect::<Vec<_>>(),
        cert.modulus,
    )?;
    let scalar_ok = gcd(cert.scalar_c, cert.modulus) == 1
        && a.pow(cert.order_pgl_j).scalar_value() == Some(cert.scalar_c % cert.modulus);
    Ok(scalar_ok && a.pow(cert.order_gl_n).is_identity())
}
