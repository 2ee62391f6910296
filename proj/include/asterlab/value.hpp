#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace asterlab::num {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_size(const Shape& s);

class Tape;

struct ValueImpl {
    Shape shape;
    std::vector<double> data;
    // Handle into the tape that recorded this value. Valid only while the
    // tape's epoch matches; a value created outside a recording scope never
    // gets one.
    Tape* tape = nullptr;
    int node = -1;
    std::uint64_t epoch = 0;
};

// Dense n-dimensional array of doubles with shared-buffer semantics.
// Copies alias the same storage, like tensor handles do.
class Value {
  public:
    Value() : impl_(std::make_shared<ValueImpl>()) {}
    Value(Shape shape, std::vector<double> data);
    explicit Value(double scalar) : Value(Shape{1}, {scalar}) {}

    static Value zeros(Shape shape);
    static Value constant(Shape shape, double fill);
    static Value identity(int n);

    const Shape& shape() const { return impl_->shape; }
    int ndim() const { return static_cast<int>(impl_->shape.size()); }
    int dim(int i) const { return impl_->shape[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return impl_->data.size(); }

    std::vector<double>& data() { return impl_->data; }
    const std::vector<double>& data() const { return impl_->data; }
    double& operator[](std::size_t i) { return impl_->data[i]; }
    double operator[](std::size_t i) const { return impl_->data[i]; }

    // 2-d convenience accessor (row-major).
    double at2(int r, int c) const {
        return impl_->data[static_cast<std::size_t>(r) * static_cast<std::size_t>(impl_->shape[1]) +
                           static_cast<std::size_t>(c)];
    }

    bool is_scalar() const { return size() == 1; }
    double scalar() const;

    bool recorded_on(const Tape& tape) const;
    int handle() const { return impl_->node; }

    Value clone() const;  // deep copy, never recorded

    std::shared_ptr<ValueImpl> impl_;
};

// Gradient arrays keyed by tape handle; returned by Tape::backward.
class Gradients {
  public:
    const std::vector<double>& at(int handle) const;
    bool has(int handle) const;
    const std::vector<double>& of(const Value& v) const { return at(v.handle()); }

  private:
    friend class Tape;
    std::vector<std::vector<double>> by_handle_;
};

// Reverse-mode differentiation tape. Operations append nodes while a
// TapeScope for this tape is active; backward() consumes the recording.
class Tape {
  public:
    using GradStore = std::vector<std::vector<double>>;
    using BackwardFn =
        std::function<void(const std::vector<double>& gout, const std::vector<std::vector<double>*>& parent_grads)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Registers v as a leaf (no-op if already recorded in this epoch).
    int ensure_node(const Value& v);

    // Records out as the result of an operation over parents.
    void record(Value& out, const std::vector<const Value*>& parents, BackwardFn backward);

    // Seeds d(loss)/d(loss) = 1, walks nodes in reverse recording order and
    // returns all gradients. The tape is cleared for reuse; previously issued
    // handles remain valid only as keys of the returned Gradients.
    Gradients backward(const Value& loss);

    void reset();

    std::size_t node_count() const { return nodes_.size(); }
    std::uint64_t epoch() const { return epoch_; }

  private:
    struct Node {
        std::vector<int> parents;
        std::size_t size;
        BackwardFn backward;  // empty for leaves
    };
    std::vector<Node> nodes_;
    std::uint64_t epoch_ = 1;
};

// The active tape is scoped and thread-local: operations record only inside
// a TapeScope, so environment and metric code never records by accident.
Tape* active_tape();

class TapeScope {
  public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

  private:
    Tape* prev_;
};

class NoGradScope {
  public:
    NoGradScope();
    ~NoGradScope();
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

  private:
    Tape* prev_;
};

}  // namespace asterlab::num
