#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "omniview/nn/mat.hpp"

namespace ov::nn {

// Reverse-mode tape. Ops push a value node plus a closure that scatters the
// node's gradient into its parents' gradients; backward() runs closures in
// reverse push order, so by the time a node's closure fires its own gradient
// is complete. Gradients are allocated lazily as zeros.
template <typename T>
class Tape {
  public:
    using Mat = MatT<T>;
    using BackFn = std::function<void(Tape&)>;

    bool grad_enabled = true;

    Tape() = default;
    explicit Tape(bool enabled) : grad_enabled(enabled) {}

    int push(Mat value, BackFn back = nullptr) {
        Node n;
        n.value = std::move(value);
        if (grad_enabled) n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    const Mat& val(int id) const { return nodes_[check(id)].value; }

    // Lazily allocated; safe to read (zeros) for leaves backward never reached.
    Mat& grad(int id) {
        Node& n = nodes_[check(id)];
        if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
        return n.grad;
    }

    bool grad_touched(int id) const { return nodes_[check(id)].grad.size() != 0; }

    void backward(int loss_id) {
        if (!grad_enabled) throw ContractError("Tape: backward with grads disabled");
        const Node& loss = nodes_[check(loss_id)];
        if (loss.value.rows() != 1 || loss.value.cols() != 1)
            throw ContractError("Tape: backward target must be 1x1");
        grad(loss_id)(0, 0) = T(1);
        for (int id = loss_id; id >= 0; --id) {
            Node& n = nodes_[static_cast<std::size_t>(id)];
            if (n.back && n.grad.size() != 0) n.back(*this);
        }
    }

    std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Mat value;
        Mat grad;
        BackFn back;
    };

    std::size_t check(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw ContractError("Tape: bad node id");
        return static_cast<std::size_t>(id);
    }

    std::vector<Node> nodes_;
};

}  // namespace ov::nn
