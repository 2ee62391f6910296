#include "asterlab/value.hpp"

#include <sstream>
#include <stdexcept>

namespace asterlab::num {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) {
        if (d <= 0) throw std::invalid_argument("non-positive shape dimension in " + shape_str(s));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Value::Value(Shape shape, std::vector<double> data) : impl_(std::make_shared<ValueImpl>()) {
    if (shape_size(shape) != data.size()) {
        throw std::invalid_argument("shape " + shape_str(shape) + " does not match data length " +
                                    std::to_string(data.size()));
    }
    impl_->shape = std::move(shape);
    impl_->data = std::move(data);
}

Value Value::zeros(Shape shape) {
    std::size_t n = shape_size(shape);
    return Value(std::move(shape), std::vector<double>(n, 0.0));
}

Value Value::constant(Shape shape, double fill) {
    std::size_t n = shape_size(shape);
    return Value(std::move(shape), std::vector<double>(n, fill));
}

Value Value::identity(int n) {
    Value v = zeros({n, n});
    for (int i = 0; i < n; ++i) v.data()[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 1)] = 1.0;
    return v;
}

double Value::scalar() const {
    if (!is_scalar()) throw std::invalid_argument("value of shape " + shape_str(shape()) + " is not scalar");
    return impl_->data[0];
}

bool Value::recorded_on(const Tape& tape) const {
    return impl_->tape == &tape && impl_->epoch == tape.epoch() && impl_->node >= 0;
}

Value Value::clone() const {
    return Value(impl_->shape, impl_->data);
}

const std::vector<double>& Gradients::at(int handle) const {
    if (handle < 0 || static_cast<std::size_t>(handle) >= by_handle_.size()) {
        throw std::out_of_range("no gradient recorded for handle " + std::to_string(handle));
    }
    return by_handle_[static_cast<std::size_t>(handle)];
}

bool Gradients::has(int handle) const {
    return handle >= 0 && static_cast<std::size_t>(handle) < by_handle_.size();
}

int Tape::ensure_node(const Value& v) {
    if (v.recorded_on(*this)) return v.impl_->node;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{{}, v.size(), nullptr});
    v.impl_->tape = this;
    v.impl_->node = id;
    v.impl_->epoch = epoch_;
    return id;
}

void Tape::record(Value& out, const std::vector<const Value*>& parents, BackwardFn backward) {
    std::vector<int> ph;
    ph.reserve(parents.size());
    for (const Value* p : parents) ph.push_back(ensure_node(*p));
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{std::move(ph), out.size(), std::move(backward)});
    out.impl_->tape = this;
    out.impl_->node = id;
    out.impl_->epoch = epoch_;
}

Gradients Tape::backward(const Value& loss) {
    if (!loss.recorded_on(*this)) {
        throw std::logic_error("backward: loss was not recorded on this tape (created outside a recording scope?)");
    }
    if (!loss.is_scalar()) {
        throw std::invalid_argument("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    }

    GradStore grads(nodes_.size());
    grads[static_cast<std::size_t>(loss.handle())] = {1.0};

    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        Node& node = nodes_[static_cast<std::size_t>(i)];
        const auto& gout = grads[static_cast<std::size_t>(i)];
        if (gout.empty() || !node.backward) continue;
        std::vector<std::vector<double>*> pg;
        pg.reserve(node.parents.size());
        for (int p : node.parents) {
            auto& slot = grads[static_cast<std::size_t>(p)];
            if (slot.empty()) slot.assign(nodes_[static_cast<std::size_t>(p)].size, 0.0);
            pg.push_back(&slot);
        }
        node.backward(gout, pg);
    }

    // Unreached nodes report zero gradients of the right size.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (grads[i].empty()) grads[i].assign(nodes_[i].size, 0.0);
    }

    Gradients result;
    result.by_handle_ = std::move(grads);
    reset();
    return result;
}

void Tape::reset() {
    nodes_.clear();
    ++epoch_;
}

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = prev_; }

NoGradScope::NoGradScope() : prev_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = prev_; }

}  // namespace asterlab::num
