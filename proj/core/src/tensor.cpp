#include "rns/tensor.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "rns/error.hpp"

namespace rns {

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

namespace {
void check_shape(const std::vector<int>& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    for (int d : shape)
        if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
}
}  // namespace

Tensor::Tensor(std::vector<int> shape, bool requires_grad) {
    check_shape(shape);
    impl_ = std::make_shared<Impl>();
    impl_->data.assign(shape_numel(shape), 0.0);
    impl_->shape = std::move(shape);
    impl_->requires_grad = requires_grad;
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape);
    if (values.size() != shape_numel(shape))
        throw ShapeError("tensor data length " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
    impl_ = std::make_shared<Impl>();
    impl_->shape = std::move(shape);
    impl_->data = std::move(values);
    impl_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
    Tensor t(std::move(shape), requires_grad);
    std::fill(t.data().begin(), t.data().end(), value);
    return t;
}

Tensor::Impl& Tensor::ref() {
    if (!impl_) throw ContractError("use of an undefined tensor");
    return *impl_;
}

const Tensor::Impl& Tensor::ref() const {
    if (!impl_) throw ContractError("use of an undefined tensor");
    return *impl_;
}

const std::vector<int>& Tensor::shape() const { return ref().shape; }
int Tensor::rank() const { return static_cast<int>(ref().shape.size()); }

int Tensor::dim(int axis) const {
    const auto& s = ref().shape;
    if (axis < 0 || axis >= static_cast<int>(s.size()))
        throw IndexError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
    return s[static_cast<std::size_t>(axis)];
}

std::size_t Tensor::size() const { return ref().data.size(); }

std::span<double> Tensor::data() { return ref().data; }
std::span<const double> Tensor::data() const { return ref().data; }

double Tensor::item() const {
    const auto& r = ref();
    if (r.data.size() != 1)
        throw ContractError("item() requires a one-element tensor, got " + shape_str(r.shape));
    return r.data[0];
}

bool Tensor::requires_grad() const { return ref().requires_grad; }
void Tensor::set_requires_grad(bool on) { ref().requires_grad = on; }

bool Tensor::has_grad() const { return !ref().grad.empty(); }

std::span<double> Tensor::grad() { return ref().grad; }
std::span<const double> Tensor::grad() const { return ref().grad; }

void Tensor::ensure_grad() {
    auto& r = ref();
    if (r.grad.empty()) r.grad.assign(r.data.size(), 0.0);
}

void Tensor::zero_grad() {
    auto& r = ref();
    std::fill(r.grad.begin(), r.grad.end(), 0.0);
}

Tensor Tensor::clone() const {
    const auto& r = ref();
    return Tensor(r.shape, r.data, r.requires_grad);
}

void Tape::record(std::vector<const void*> inputs, const void* output, BackwardFn backward) {
    nodes_.push_back(Node{std::move(inputs), output, std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
    if (consumed_) throw ContractError("backward: tape already consumed; build a new tape");
    if (loss.size() != 1)
        throw ContractError("backward: loss must be scalar, got " + shape_str(loss.shape()));
    if (!loss.requires_grad() || !loss.has_grad())
        throw ContractError("backward: loss is not tracked by this tape");
    consumed_ = true;
    const_cast<Tensor&>(loss).grad()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward();
}

bool Tape::topologically_ordered() const {
    std::unordered_map<const void*, std::size_t> producer;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        producer.emplace(nodes_[i].output, i);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (const void* in : nodes_[i].inputs) {
            auto it = producer.find(in);
            if (it != producer.end() && it->second >= i) return false;
        }
    }
    return true;
}

void Tape::record_selections(std::vector<int>& sink) {
    sink_ = &sink;
    replay_ = nullptr;
    replay_pos_ = 0;
}

void Tape::replay_selections(const std::vector<int>& source) {
    replay_ = &source;
    sink_ = nullptr;
    replay_pos_ = 0;
}

int Tape::next_pinned() {
    if (!replay_) throw ContractError("next_pinned called outside selection replay");
    if (replay_pos_ >= replay_->size())
        throw ContractError("selection replay ran dry: forward structure changed");
    return (*replay_)[replay_pos_++];
}

void Tape::note_selection(int index) {
    if (sink_) sink_->push_back(index);
}

}  // namespace rns
