//! Human-readable descriptions of generated rows.

use super::RowFamily;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowExplanation {
    pub key: String,
    pub description: &'static str,
    pub algebra: &'static str,
}

impl std::fmt::Display for RowExplanation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.key)?;
        writeln!(f, "  {}", self.description)?;
        write!(f, "  {}", self.algebra)
    }
}

fn text(family: RowFamily) -> (&'static str, &'static str) {
    match family {
        RowFamily::Material => (
            "material utilization covers component manufacturing [material, year]",
            "u[m,y] - sum_c D_co[m,c] * v[c,y] >= 0",
        ),
        RowFamily::Component => (
            "component output covers product manufacturing [component, year]",
            "v[c,y] - sum_p D_pr[c,p] * w[p,y] >= 0",
        ),
        RowFamily::Supply => (
            "material use limited by primary supply, recovery from retirements and stock [material, year]",
            "u[m,y] - sum_g R_rec[m,g] * P[g] * r[g,y] - s[m,y] <= M[m,y]",
        ),
        RowFamily::Stock => (
            "stock carried over from the previous year [material, year]",
            "s[m,y] - s[m,y-1] + u[m,y-1] - sum_g R_rec[m,g] * P[g] * r[g,y-1] = M[m,y-1]",
        ),
        RowFamily::Product => (
            "planned capacity limited by manufactured products [technology, year]",
            "sum_{g of k} P[g] * d[g,y] - sum_{p of k} w[p,y] <= 0",
        ),
        RowFamily::Land => (
            "planned capacity limited by available field area [field, zone, year]",
            "sum_{g in field} P[g] / R_cap[g] * d[g,y] - f[k,i,y] <= 0",
        ),
        RowFamily::Field => (
            "field area carried over, minus area committed last year, plus area returned by retirements [field, zone, year]",
            "f[k,i,y] - f[k,i,y-1] + sum_g P[g]/R_cap[g] * d[g,y-1] - sum_g P[g]/R_cap[g] * r[g,y] = 0   (first year: f[k,i,y] - sum_g P[g]/R_cap[g] * r[g,y] = A[k,i])",
        ),
        RowFamily::Lead => (
            "unit comes online exactly its lead time after the decision [unit, year]",
            "b[g,y] - d[g,y-T_lead] = 0",
        ),
        RowFamily::Life => (
            "unit retires exactly its lifetime after coming online [unit, year]",
            "r[g,y] - b[g,y-T_life] = 0",
        ),
        RowFamily::Once => (
            "each candidate block is invested in at most once [unit, year]",
            "sum_{y' <= y} d[g,y'] <= 1",
        ),
        RowFamily::Balance => (
            "nodal energy balance including exogenous imports [zone, day, hour, year]",
            "sum_g p + sum_s (dc - c) + sum_{l in} q - sum_{l out} q + ls = L - import",
        ),
        RowFamily::ThermalCap => (
            "thermal output limited by capacity of an operating unit [unit, day, hour, year]",
            "p[g,t,h,y] - P[g] * o[g,y] <= 0",
        ),
        RowFamily::RenewableCap => (
            "renewable output limited by availability [unit, day, hour, year]",
            "p[g,t,h,y] - F[g,t,h,y] * P[g] * o[g,y] <= 0",
        ),
        RowFamily::Status => (
            "operating status follows builds and retirements [unit, year]",
            "o[g,y] - o[g,y-1] - b[g,y] + r[g,y] = 0   (first year: o[g,y] - b[g,y] + r[g,y] = 1 if existing else 0)",
        ),
        RowFamily::Reserve => (
            "system-wide reserve margin on ELCC-credited capacity [year]",
            "sum_g ELCC[k(g),y] * P[g] * o[g,y] + rm[y] >= (1 + R_rm[y]) * Lpeak[y]",
        ),
        RowFamily::Rps => (
            "technology-specific renewable portfolio requirement [technology, year]",
            "sum_{g of k} sum_t N[t,y] sum_h p[g,t,h,y] + rps[k,y] >= R_rps[k,y] * sum_t N[t,y] sum_i sum_h L[i,t,h,y]",
        ),
        RowFamily::Charge => (
            "storage charging limited by power capacity [unit, day, hour, year]",
            "c[g,t,h,y] - P[g] * o[g,y] <= 0",
        ),
        RowFamily::Discharge => (
            "storage discharging limited by power capacity [unit, day, hour, year]",
            "dc[g,t,h,y] - P[g] * o[g,y] <= 0",
        ),
        RowFamily::SocMax => (
            "state of charge limited by energy capacity [unit, day, hour, year]",
            "soc[g,t,h,y] - E[g] * o[g,y] <= 0",
        ),
        RowFamily::SocBalance => (
            "state of charge follows charging and discharging; hour 1 continues from the last hour of the same day [unit, day, hour, year]",
            "soc[g,t,h,y] - soc[g,t,h-1,y] - eff_ch * c[g,t,h,y] + dc[g,t,h,y] / eff_dc = 0",
        ),
        RowFamily::SocStart => (
            "state of charge starts the day at half the energy capacity [unit, day, year]",
            "soc[g,t,1,y] - 0.5 * E[g] * o[g,y] = 0",
        ),
        RowFamily::SocEnd => (
            "state of charge ends the day at half the energy capacity [unit, day, year]",
            "soc[g,t,H,y] - 0.5 * E[g] * o[g,y] = 0",
        ),
    }
}

/// Describes the row named `key`, or `None` for unknown prefixes.
pub fn explain_row(key: &str) -> Option<RowExplanation> {
    let prefix = key.split('[').next()?;
    let (description, algebra) = match prefix {
        "link" => (
            "duplicate of an incoming state value, pinned to the previous year's decision",
            "z[key] = value from previous stage",
        ),
        "cut" => (
            "optimality cut approximating the cost of all later years [year, index]",
            "alpha[y] - mu' m >= C - mu' m_trial",
        ),
        p => text(RowFamily::from_prefix(p)?),
    };
    Some(RowExplanation {
        key: key.to_string(),
        description,
        algebra,
    })
}
