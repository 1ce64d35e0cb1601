use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// Level-dependent insertion probabilities and lifetimes.
    Full,
    /// Level-dependent insertion probabilities, one lifetime for every order.
    UniformLifetime,
    /// Uniform insertion probabilities and one lifetime for every order.
    UniformAll,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "FULL",
            Variant::UniformLifetime => "UNIFORM_LIFETIME",
            Variant::UniformAll => "UNIFORM_ALL",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FULL" => Ok(Variant::Full),
            "UNIFORM_LIFETIME" => Ok(Variant::UniformLifetime),
            "UNIFORM_ALL" => Ok(Variant::UniformAll),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

/// Complete parameterization of the cushion model.
///
/// `Default` is the calibration to one large-tick trading day: 273,835
/// orders over 6.5 hours, a 25-level cushion, 1.47 % market orders, level
/// depth scale 3.045, base lifetime 13.24 s growing with scale 5.46.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimParams {
    /// Number of order draws (`N`).
    pub n_orders: u64,
    /// Session length in ms (`T`).
    pub session_ms: i64,
    /// Cushion half-width in levels (`L`).
    pub levels: usize,
    pub p_market: f64,
    /// Insertion-level decay scale (`l0`).
    pub level_scale: f64,
    /// Lifetime at level 0 in ms (`t_lt`).
    pub base_lifetime_ms: f64,
    /// Lifetime growth scale in levels (`l_lt`).
    pub lifetime_level_scale: f64,
    pub start_price_ticks: i64,
    pub initial_orders_per_tick: u32,
    pub initial_lifetime_ms: i64,
    pub order_volume_shares: u64,
    /// Lifetime used by the uniform-lifetime variants.
    pub uniform_lifetime_ms: f64,
    pub variant: Variant,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            n_orders: 273_835,
            session_ms: 23_400_000,
            levels: 25,
            p_market: 0.0147,
            level_scale: 3.045,
            base_lifetime_ms: 13_240.0,
            lifetime_level_scale: 5.46,
            start_price_ticks: 2_340,
            initial_orders_per_tick: 10,
            initial_lifetime_ms: 30_000,
            order_volume_shares: 205,
            uniform_lifetime_ms: 30_019.0,
            variant: Variant::Full,
            seed: 1,
        }
    }
}

const KEYS: [&str; 14] = [
    "N",
    "T_ms",
    "L",
    "P_market",
    "l0",
    "t_lt_ms",
    "l_lt",
    "S0_ticks",
    "initial_orders_per_tick",
    "initial_lifetime_ms",
    "order_volume_shares",
    "uniform_lifetime_ms",
    "variant",
    "seed",
];

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidParams(msg.to_string()));
        if self.levels < 1 {
            return bad("L must be at least 1");
        }
        if self.session_ms <= 0 {
            return bad("T_ms must be positive");
        }
        if !(0.0..=1.0).contains(&self.p_market) {
            return bad("P_market must lie in [0, 1]");
        }
        for (name, v) in [
            ("l0", self.level_scale),
            ("t_lt_ms", self.base_lifetime_ms),
            ("l_lt", self.lifetime_level_scale),
            ("uniform_lifetime_ms", self.uniform_lifetime_ms),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::InvalidParams(format!(
                    "{name} must be positive and finite"
                )));
            }
        }
        if self.start_price_ticks <= self.levels as i64 {
            return bad("S0_ticks must exceed L");
        }
        if self.initial_lifetime_ms < 0 {
            return bad("initial_lifetime_ms must be non-negative");
        }
        if self.order_volume_shares == 0 {
            return bad("order_volume_shares must be positive");
        }
        Ok(())
    }

    /// Parses a flat `key = value` file. Keys are the model symbols; missing
    /// keys keep their default, unknown keys are rejected. `#` starts a comment.
    pub fn from_config_str(text: &str) -> Result<Self, SimError> {
        let mut p = SimParams::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SimError::Config {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("bad value `{v}` for `{key}`"))
            }
            let res: Result<(), String> = (|| {
                match key {
                    "N" => p.n_orders = num(key, value)?,
                    "T_ms" => p.session_ms = num(key, value)?,
                    "L" => p.levels = num(key, value)?,
                    "P_market" => p.p_market = num(key, value)?,
                    "l0" => p.level_scale = num(key, value)?,
                    "t_lt_ms" => p.base_lifetime_ms = num(key, value)?,
                    "l_lt" => p.lifetime_level_scale = num(key, value)?,
                    "S0_ticks" => p.start_price_ticks = num(key, value)?,
                    "initial_orders_per_tick" => p.initial_orders_per_tick = num(key, value)?,
                    "initial_lifetime_ms" => p.initial_lifetime_ms = num(key, value)?,
                    "order_volume_shares" => p.order_volume_shares = num(key, value)?,
                    "uniform_lifetime_ms" => p.uniform_lifetime_ms = num(key, value)?,
                    "variant" => p.variant = value.parse()?,
                    "seed" => p.seed = num(key, value)?,
                    other => {
                        return Err(format!(
                            "unknown key `{other}` (expected one of {})",
                            KEYS.join(", ")
                        ))
                    }
                }
                Ok(())
            })();
            res.map_err(err)?;
        }
        p.validate()?;
        Ok(p)
    }

    /// Inverse of [`SimParams::from_config_str`].
    pub fn to_config_string(&self) -> String {
        let values = [
            self.n_orders.to_string(),
            self.session_ms.to_string(),
            self.levels.to_string(),
            self.p_market.to_string(),
            self.level_scale.to_string(),
            self.base_lifetime_ms.to_string(),
            self.lifetime_level_scale.to_string(),
            self.start_price_ticks.to_string(),
            self.initial_orders_per_tick.to_string(),
            self.initial_lifetime_ms.to_string(),
            self.order_volume_shares.to_string(),
            self.uniform_lifetime_ms.to_string(),
            self.variant.to_string(),
            self.seed.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let p = SimParams {
            variant: Variant::UniformAll,
            seed: 99,
            p_market: 0.25,
            ..SimParams::default()
        };
        let text = p.to_config_string();
        assert_eq!(SimParams::from_config_str(&text).unwrap(), p);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let p = SimParams::from_config_str("# comment\nN = 1000\n\nvariant = UNIFORM_LIFETIME # inline\n")
            .unwrap();
        assert_eq!(p.n_orders, 1000);
        assert_eq!(p.variant, Variant::UniformLifetime);
        assert_eq!(p.levels, 25);
    }

    #[test]
    fn malformed_config() {
        for (text, line) in [
            ("N = 5\nfoo = 1\n", 2),
            ("N 5\n", 1),
            ("\nL = x\n", 2),
            ("variant = MEDIUM\n", 1),
        ] {
            match SimParams::from_config_str(text) {
                Err(SimError::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(
            SimParams::from_config_str("S0_ticks = 25\n"),
            Err(SimError::InvalidParams(_))
        ));
    }

    #[test]
    fn validation() {
        assert!(SimParams::default().validate().is_ok());
        let cases = [
            SimParams { levels: 0, ..Default::default() },
            SimParams { session_ms: 0, ..Default::default() },
            SimParams { p_market: 1.5, ..Default::default() },
            SimParams { level_scale: 0.0, ..Default::default() },
            SimParams { base_lifetime_ms: -1.0, ..Default::default() },
            SimParams { lifetime_level_scale: f64::NAN, ..Default::default() },
            SimParams { start_price_ticks: 25, ..Default::default() },
            SimParams { order_volume_shares: 0, ..Default::default() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
