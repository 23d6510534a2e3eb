#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rns {

std::string shape_str(const std::vector<int>& shape);
std::size_t shape_numel(const std::vector<int>& shape);

/// Dense row-major tensor of 64-bit floats with shared storage. Copying a
/// Tensor copies the handle, not the buffer; parameter tensors rely on this
/// so that the optimizer, checkpoints and tape nodes all see one storage.
/// The gradient buffer is absent until ensure_grad() and always has the same
/// length as the data when present.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape, bool requires_grad = false);
    Tensor(std::vector<int> shape, std::vector<double> values, bool requires_grad = false);

    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);

    bool defined() const noexcept { return impl_ != nullptr; }
    const std::vector<int>& shape() const;
    int rank() const;
    int dim(int axis) const;
    std::size_t size() const;

    std::span<double> data();
    std::span<const double> data() const;
    /// Value of a one-element tensor.
    double item() const;

    bool requires_grad() const;
    void set_requires_grad(bool on);

    bool has_grad() const;
    std::span<double> grad();
    std::span<const double> grad() const;
    /// Allocate (zeroed) gradient storage if absent.
    void ensure_grad();
    void zero_grad();

    /// Deep copy of shape/data/flags; the gradient buffer is not copied.
    Tensor clone() const;

    /// Stable identity used by the tape to relate nodes to tensors.
    const void* id() const noexcept { return impl_.get(); }

private:
    struct Impl {
        std::vector<int> shape;
        std::vector<double> data;
        std::vector<double> grad;  // empty until ensure_grad()
        bool requires_grad = false;
    };
    std::shared_ptr<Impl> impl_;
    Impl& ref();
    const Impl& ref() const;
};

/// Append-only record of differentiable operations (a Wengert list). Ops push
/// one node per tracked output; backward() seeds d(loss)/d(loss) = 1 and
/// replays the list once in reverse append order, which is a valid reverse
/// topological order because nodes are appended in execution order. Running
/// backward a second time on the same tape is an error.
class Tape {
public:
    using BackwardFn = std::function<void()>;

    void record(std::vector<const void*> inputs, const void* output, BackwardFn backward);
    void backward(const Tensor& loss);

    bool consumed() const noexcept { return consumed_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    /// Every node's inputs are leaves or outputs of earlier nodes.
    bool topologically_ordered() const;

    // Selection bookkeeping for max/argmax style ops. Derivative probes pin
    // the recorded choices so a perturbed forward pass stays inside the same
    // piecewise-smooth region as the baseline pass.
    void record_selections(std::vector<int>& sink);
    void replay_selections(const std::vector<int>& source);
    bool replaying() const noexcept { return replay_ != nullptr; }
    int next_pinned();
    void note_selection(int index);

private:
    struct Node {
        std::vector<const void*> inputs;
        const void* output;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
    bool consumed_ = false;
    std::vector<int>* sink_ = nullptr;
    const std::vector<int>* replay_ = nullptr;
    std::size_t replay_pos_ = 0;
};

}  // namespace rns
