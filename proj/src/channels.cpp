#include "qnet/channels.hpp"

#include <cmath>

#include "qnet/qstream.hpp"

namespace qnet {

ErrorModel ErrorModel::attenuation(double alpha_db_per_km) {
    if (alpha_db_per_km < 0) throw ConfigError("attenuation coefficient must be >= 0");
    ErrorModel m;
    m.kind_ = Kind::Attenuation;
    m.alpha_ = alpha_db_per_km;
    return m;
}

ErrorModel ErrorModel::random_unitary(double p_error) {
    if (p_error < 0 || p_error > 1) throw ConfigError("error probability must be in [0, 1]");
    ErrorModel m;
    m.kind_ = Kind::RandomUnitary;
    m.p_error_ = p_error;
    return m;
}

ErrorModel ErrorModel::custom(Hook hook) {
    ErrorModel m;
    m.kind_ = Kind::Custom;
    m.hook_ = std::move(hook);
    return m;
}

double ErrorModel::drop_probability(double length_km) const {
    if (kind_ != Kind::Attenuation) return 0.0;
    return 1.0 - std::pow(10.0, -alpha_ * length_km / 10.0);
}

MaybeQubit ErrorModel::apply(QubitRef q, double length_km, Rng& rng) const {
    switch (kind_) {
        case Kind::None:
            return q;
        case Kind::Attenuation:
            // the reference is dropped; the underlying state is untouched
            if (rng.bernoulli(drop_probability(length_km))) return std::nullopt;
            return q;
        case Kind::RandomUnitary: {
            if (rng.bernoulli(p_error_)) {
                const Unitary u = haar_unitary_2x2(rng);
                const int targets[] = {q.qubit};
                resolve(q).apply_targeted_unitary(u.m, targets);
            }
            return q;
        }
        case Kind::Custom:
            return hook_(q, length_km, rng);
    }
    return q;
}

Unitary haar_unitary_2x2(Rng& rng) {
    while (true) {
        const cdouble z00{rng.normal(), rng.normal()};
        const cdouble z10{rng.normal(), rng.normal()};
        const cdouble z01{rng.normal(), rng.normal()};
        const cdouble z11{rng.normal(), rng.normal()};
        const double n1 = std::sqrt(std::norm(z00) + std::norm(z10));
        if (n1 < 1e-12) continue;
        const cdouble q00 = z00 / n1, q10 = z10 / n1;
        const cdouble overlap = std::conj(q00) * z01 + std::conj(q10) * z11;
        const cdouble w0 = z01 - overlap * q00, w1 = z11 - overlap * q10;
        const double n2 = std::sqrt(std::norm(w0) + std::norm(w1));
        if (n2 < 1e-12) continue;
        Unitary u(2);
        u.m = {q00, w0 / n2, q10, w1 / n2};
        return u;
    }
}

CorruptionRecord sample_group_corruption(Rng& rng, std::size_t group_size) {
    CorruptionRecord rec;
    rec.index = static_cast<int>(rng.uniform_int(group_size));
    rec.u = haar_unitary_2x2(rng);
    return rec;
}

CorruptionRecord random_single_qubit_corruption(std::span<const QubitRef> group, Rng& rng) {
    if (group.size() != 9) throw UsageError("corruption group must contain exactly 9 qubits");
    for (const QubitRef& q : group)
        if (q.stream != group[0].stream || q.system != group[0].system)
            throw UsageError("corruption group must live in one system");
    const CorruptionRecord rec = sample_group_corruption(rng, group.size());
    const QubitRef target = group[static_cast<std::size_t>(rec.index)];
    const int targets[] = {target.qubit};
    resolve(target).apply_targeted_unitary(rec.u.m, targets);
    return rec;
}

ErrorModel make_group_corruption_model(Rng base, std::size_t group_size,
                                       std::shared_ptr<std::vector<CorruptionEvent>> record,
                                       bool force_identity) {
    return ErrorModel::custom([base, group_size, record, force_identity](
                                  QubitRef q, double, Rng&) -> MaybeQubit {
        Rng group_rng = base.split(static_cast<std::uint64_t>(q.system));
        const auto hit = static_cast<int>(group_rng.uniform_int(group_size));
        if (q.qubit == hit) {
            const Unitary u = force_identity ? identity_matrix(2) : haar_unitary_2x2(group_rng);
            const int targets[] = {q.qubit};
            resolve(q).apply_targeted_unitary(u.m, targets);
            if (record) record->push_back({q.system, hit, u});
        }
        return q;
    });
}

}  // namespace qnet
