use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(i64, u64),
    #[error("coefficient at index {index} is zero modulo {p}")]
    ZeroCoefficient { index: usize, p: u64 },
    #[error("form has no coefficients")]
    EmptyForm,
    #[error("work size {size} exceeds guard {guard}")]
    TooLarge { size: u128, guard: u128 },
    #[error("p = {0} lies above the verified range (p <= 37); pass the override to search anyway")]
    OutOfVerifiedRange(u64),
    #[error("bound stays positive on the whole search interval [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("rounding guard failed: value {value}, nearest integer {nearest}, imaginary residue {imag}")]
    PrecisionLoss { value: f64, nearest: f64, imag: f64 },
    #[error("bound violated at p={p}, a={a}, b={b}, u={u}, v={v}: |W| = {magnitude} > {bound}")]
    BoundViolation {
        p: u64,
        a: u64,
        b: u64,
        u: u64,
        v: u64,
        magnitude: f64,
        bound: f64,
    },
    #[error("invalid config at `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
