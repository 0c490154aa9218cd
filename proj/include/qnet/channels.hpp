#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qnet/matrix.hpp"
#include "qnet/qstate.hpp"
#include "qnet/rng.hpp"
#include "qnet/types.hpp"

namespace qnet {

/// A transmitted qubit slot; empty means the qubit was lost (either dropped by
/// the channel or already lost upstream and forwarded as an empty slot).
using MaybeQubit = std::optional<QubitRef>;

/// Timed, blocking FIFO conduit end. Items leave in emission order; delivery
/// computes receive_time = emission_time + length/signal_speed. transmit
/// blocks when a capacity bound is set and reached; deliver blocks on empty.
template <class T>
class Conduit {
public:
    struct Delivery {
        T item;
        TimeNs emission;
        TimeNs receive_time;
    };

    Conduit(std::string name, double length_km, double signal_speed_km_per_s,
            std::optional<std::size_t> capacity = std::nullopt)
        : name_(std::move(name)),
          length_km_(length_km),
          speed_(signal_speed_km_per_s),
          capacity_(capacity) {
        if (length_km < 0) throw ConfigError("channel length must be >= 0");
        if (signal_speed_km_per_s <= 0) throw ConfigError("signal speed must be > 0");
    }

    virtual ~Conduit() = default;

    const std::string& name() const { return name_; }
    double length_km() const { return length_km_; }
    double signal_speed() const { return speed_; }
    TimeNs delay_ns() const { return length_km_ / speed_ * 1e9; }

    void transmit(T item, TimeNs emission_time) {
        std::unique_lock lock(mu_);
        cv_space_.wait(lock, [&] {
            return closed_ || !capacity_ || queue_.size() < *capacity_;
        });
        if (closed_) throw_closed();
        queue_.emplace_back(std::move(item), emission_time);
        cv_items_.notify_one();
    }

    Delivery deliver() {
        std::unique_lock lock(mu_);
        cv_items_.wait(lock, [&] { return closed_ || !queue_.empty(); });
        if (queue_.empty()) throw_closed();
        Delivery d{std::move(queue_.front().first), queue_.front().second, 0};
        queue_.pop_front();
        d.receive_time = d.emission + delay_ns();
        cv_space_.notify_one();
        lock.unlock();
        return finish_delivery(std::move(d));
    }

    void close(bool aborted = false) {
        {
            std::lock_guard lock(mu_);
            closed_ = true;
            aborted_ = aborted_ || aborted;
        }
        cv_items_.notify_all();
        cv_space_.notify_all();
    }

    bool closed() const {
        std::lock_guard lock(mu_);
        return closed_;
    }

    std::size_t pending() const {
        std::lock_guard lock(mu_);
        return queue_.size();
    }

protected:
    /// Hook for subclasses (the quantum conduit applies its error model here,
    /// outside the queue lock).
    virtual Delivery finish_delivery(Delivery d) { return d; }

private:
    [[noreturn]] void throw_closed() {
        if (aborted_) throw AbortedError("simulation aborted while using " + name_);
        throw BrokenLinkError("peer terminated; conduit " + name_ + " is closed and empty");
    }

    std::string name_;
    double length_km_;
    double speed_;
    std::optional<std::size_t> capacity_;

    mutable std::mutex mu_;
    std::condition_variable cv_items_, cv_space_;
    std::deque<std::pair<T, TimeNs>> queue_;
    bool closed_ = false;
    bool aborted_ = false;
};

/// Pluggable per-qubit noise. apply() depends only on the item, the channel
/// length and the rng state, so seeded runs reproduce exactly.
class ErrorModel {
public:
    enum class Kind { None, Attenuation, RandomUnitary, Custom };
    using Hook = std::function<MaybeQubit(QubitRef, double length_km, Rng&)>;

    ErrorModel() = default;

    static ErrorModel none() { return ErrorModel(); }
    static ErrorModel attenuation(double alpha_db_per_km);
    static ErrorModel random_unitary(double p_error);
    static ErrorModel custom(Hook hook);

    Kind kind() const { return kind_; }
    double alpha_db_per_km() const { return alpha_; }

    /// Per-qubit drop probability of the attenuation model over length L:
    /// 1 - 10^(-alpha L / 10), the optical-power reading of the dB figure.
    double drop_probability(double length_km) const;

    MaybeQubit apply(QubitRef q, double length_km, Rng& rng) const;

private:
    Kind kind_ = Kind::None;
    double alpha_ = 0.0;
    double p_error_ = 1.0;
    Hook hook_;
};

inline MaybeQubit apply_error(const ErrorModel& model, QubitRef q, double length_km, Rng& rng) {
    return model.apply(q, length_km, rng);
}

/// Quantum conduit: timed FIFO plus an error model applied exactly once per
/// delivered item. The model's rng is reseeded by the simulation supervisor.
class QuantumConduit : public Conduit<MaybeQubit> {
public:
    QuantumConduit(std::string name, double length_km, double signal_speed_km_per_s,
                   ErrorModel model, std::optional<std::size_t> capacity = std::nullopt)
        : Conduit<MaybeQubit>(std::move(name), length_km, signal_speed_km_per_s, capacity),
          model_(std::move(model)),
          rng_(0) {}

    void reseed(const Rng& rng) { rng_ = rng; }
    const ErrorModel& error_model() const { return model_; }

protected:
    Delivery finish_delivery(Delivery d) override {
        if (d.item) d.item = model_.apply(*d.item, length_km(), rng_);
        return d;
    }

private:
    ErrorModel model_;
    Rng rng_;
};

/// Haar-distributed element of U(2), via Gram-Schmidt QR of a complex
/// Gaussian matrix with positive-diagonal R.
Unitary haar_unitary_2x2(Rng& rng);

struct CorruptionRecord {
    int index = 0;  // which qubit of the group was hit
    Unitary u;
};

/// Draws (index, unitary) for a group corruption without touching any state.
CorruptionRecord sample_group_corruption(Rng& rng, std::size_t group_size = 9);

/// Applies a Haar-random 2x2 unitary to one uniformly chosen qubit of a
/// nine-qubit group (all refs in one system). Returns what was applied where.
CorruptionRecord random_single_qubit_corruption(std::span<const QubitRef> group, Rng& rng);

struct CorruptionEvent {
    std::uint32_t system = 0;
    int qubit = 0;
    Unitary u;
};

/// Error model corrupting one uniformly chosen qubit per group of
/// `group_size` (one group = one system). The choice and the sampled unitary
/// derive from rng.split(system), so they are identical across conduits
/// seeded with the same base rng. `record`, when given, collects one event
/// per corrupted group; `force_identity` is a test hook.
ErrorModel make_group_corruption_model(Rng base, std::size_t group_size = 9,
                                       std::shared_ptr<std::vector<CorruptionEvent>> record = {},
                                       bool force_identity = false);

}  // namespace qnet
