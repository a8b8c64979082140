#include "pairwalk/model.hpp"
#include "pairwalk/errors.hpp"

#include <cmath>
#include <sstream>

namespace pairwalk {

ModelParams ModelParams::validated(double alpha, double p, double theta) {
    if (!(alpha > 0.0))
        throw InvalidParameter("alpha must be > 0, got " + std::to_string(alpha));
    if (!(p > 0.0 && p < 1.0))
        throw InvalidParameter("p must lie in (0,1), got " + std::to_string(p));
    if (!(1.0 + theta >= 0.0))
        throw InvalidParameter("theta must be >= -1 (rate alpha*(theta+1) at w=1), got " +
                               std::to_string(theta));
    return ModelParams{alpha, p, theta};
}

EffectiveRates effective_rates(const ModelParams& params, long long w) {
    if (w < 0) throw DomainError("effective_rates: w must be >= 0");
    const double a = params.alpha;
    if (w == 0) return {2.0 * a, 0.0, 2.0 * a};
    if (w == 1) return {a, a * (params.theta + 1.0), a * (2.0 + params.theta)};
    return {a, a, 2.0 * a};
}

namespace {

double relative_residual(double lhs, double rhs) {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return std::abs(lhs - rhs) / scale;
}

} // namespace

ConditionReport validate_rates(const RateTable& r) {
    const double all[6] = {r.cp10, r.cm10, r.cp20, r.cm20, r.cp11, r.cm11};
    for (double v : all)
        if (v < 0.0) throw NonnegativityViolation("rate table has a negative entry");

    const double alpha = r.cp10 + r.cm10;
    if (alpha == 0.0)
        throw DegenerateModel("c+(1,0) + c-(1,0) must be positive");

    ConditionReport rep;
    rep.cond1_residual = relative_residual(r.cp20 + r.cm20, 2.0 * alpha);
    // cross products tolerate totally asymmetric tables (a zero c-)
    rep.cond2_residuals[0] = relative_residual(r.cp10 * r.cm11, r.cp11 * r.cm10);
    rep.cond2_residuals[1] = relative_residual(r.cp10 * r.cm20, r.cp20 * r.cm10);

    rep.passed = rep.cond1_residual <= kConditionTolerance &&
                 rep.cond2_residuals[0] <= kConditionTolerance &&
                 rep.cond2_residuals[1] <= kConditionTolerance;

    if (rep.passed) {
        const double p = r.cp10 / alpha;
        const double theta = (r.cp11 + r.cm11) / alpha - 1.0;
        if (p > 0.0 && p < 1.0)
            rep.derived_params = ModelParams::validated(alpha, p, theta);
        // p in {0,1}: conditions hold but the strict ModelParams contract
        // excludes the boundary; transforms can still be queried directly.
    }
    return rep;
}

RateTable rates_from_params(const ModelParams& m) {
    const double ap = m.alpha * m.p;
    const double aq = m.alpha * m.q();
    RateTable r;
    r.cp10 = ap;                       // c+(1,0) = alpha*p*1*(1+0)
    r.cm10 = aq;
    r.cp20 = 2.0 * ap;                 // c+(2,0) = alpha*p*2*(1+0)
    r.cm20 = 2.0 * aq;
    r.cp11 = ap * (1.0 + m.theta);     // c+(1,1) = alpha*p*1*(1+theta)
    r.cm11 = aq * (1.0 + m.theta);
    return r;
}

double ProcessPreset::duality_weight(int m, long long n) const {
    if (m < 0 || m > 2)
        throw DomainError("duality_weight: only m <= 2 is stored");
    if (n < m) return 0.0;
    if (m == 0) return 1.0;
    if (m == 1) return c1 * static_cast<double>(n);
    return c2 * static_cast<double>(n) * static_cast<double>(n - 1);
}

ModelParams ProcessPreset::params(double p) const {
    return ModelParams::validated(alpha, p, theta);
}

std::string ProcessPreset::name() const {
    std::ostringstream os;
    switch (kind) {
        case ProcessKind::SIP: os << "sip:" << parameter; break;
        case ProcessKind::SEP: os << "sep:" << static_cast<long long>(parameter); break;
        case ProcessKind::IRW: os << "irw"; break;
    }
    return os.str();
}

ProcessPreset make_preset(ProcessKind kind, double parameter,
                          std::optional<double> alpha) {
    ProcessPreset ps;
    ps.kind = kind;
    ps.parameter = parameter;
    switch (kind) {
        case ProcessKind::SIP: {
            if (!(parameter > 0.0))
                throw InvalidParameter("SIP parameter k must be > 0");
            const double k = parameter;
            ps.theta = 1.0 / k;
            ps.alpha = alpha.value_or(2.0 * k);
            ps.c1 = 1.0 / k;
            ps.c2 = 1.0 / (k * (k + 1.0));
            break;
        }
        case ProcessKind::SEP: {
            const double j = parameter;
            if (!(j >= 1.0) || j != std::floor(j))
                throw InvalidParameter("SEP parameter j must be a positive integer");
            ps.theta = -1.0 / j;
            ps.alpha = alpha.value_or(2.0 * j);
            ps.c1 = 1.0 / j;
            // two dual particles cannot share a site when j = 1
            ps.c2 = (j > 1.0) ? 1.0 / (j * (j - 1.0)) : 0.0;
            break;
        }
        case ProcessKind::IRW: {
            ps.parameter = 0.0;
            ps.theta = 0.0;
            ps.alpha = alpha.value_or(2.0);
            ps.c1 = 1.0;
            ps.c2 = 1.0;
            break;
        }
    }
    if (!(ps.alpha > 0.0)) throw InvalidParameter("alpha must be > 0");
    return ps;
}

ModelSpec parse_model_spec(const std::string& text,
                           std::optional<double> p_override,
                           std::optional<double> alpha_override) {
    auto starts_with = [&](const char* pre) { return text.rfind(pre, 0) == 0; };

    if (text == "irw" || starts_with("sip:") || starts_with("sep:")) {
        ProcessPreset ps;
        if (text == "irw") {
            ps = make_preset(ProcessKind::IRW, 0.0, alpha_override);
        } else {
            const double param = std::stod(text.substr(4));
            ps = make_preset(starts_with("sip:") ? ProcessKind::SIP : ProcessKind::SEP,
                             param, alpha_override);
        }
        return {ps.params(p_override.value_or(0.5)), ps};
    }

    // six comma-separated rates: cp10,cm10,cp20,cm20,cp11,cm11
    RateTable r;
    double* slots[6] = {&r.cp10, &r.cm10, &r.cp20, &r.cm20, &r.cp11, &r.cm11};
    std::istringstream is(text);
    std::string tok;
    int i = 0;
    while (std::getline(is, tok, ',')) {
        if (i >= 6) throw InvalidParameter("expected exactly six rates, got more");
        *slots[i++] = std::stod(tok);
    }
    if (i != 6)
        throw InvalidParameter("model spec must be sip:<k>, sep:<j>, irw, or six rates");

    ConditionReport rep = validate_rates(r);
    if (!rep.passed)
        throw InvalidParameter("rate table violates the two-particle compatibility conditions");
    if (!rep.derived_params)
        throw InvalidParameter("rate table is totally asymmetric (p on the boundary of (0,1))");
    ModelParams m = *rep.derived_params;
    if (p_override) m = ModelParams::validated(m.alpha, *p_override, m.theta);
    if (alpha_override) m = ModelParams::validated(*alpha_override, m.p, m.theta);
    return {m, std::nullopt};
}

} // namespace pairwalk
