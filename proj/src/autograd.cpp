#include "stim/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

namespace stim {

VarPtr constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = false;
    return n;
}

VarPtr leaf(Tensor value) {
    auto n = std::make_shared<Node>();
    n->grad = Tensor::zeros(value.shape);
    n->value = std::move(value);
    n->requires_grad = true;
    return n;
}

namespace {

VarPtr make_op(Tensor value, std::vector<VarPtr> parents,
               std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->requires_grad = false;
    for (const auto& p : parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) {
        n->grad = Tensor::zeros(value.shape);
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    n->value = std::move(value);
    return n;
}

void check_same_shape(const VarPtr& a, const VarPtr& b, const char* op) {
    if (!a->value.same_shape(b->value))
        throw DimensionError(std::string(op) + ": shape mismatch");
}

void topo_sort(const VarPtr& root, std::vector<Node*>& order) {
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* parent = node->parents[idx++].get();
            if (parent->requires_grad && seen.insert(parent).second)
                stack.push_back({parent, 0});
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

}  // namespace

void backward(const VarPtr& loss) {
    if (loss->value.size() != 1)
        throw DimensionError("backward: loss must be a scalar node");
    if (!loss->requires_grad) return;
    std::vector<Node*> order;
    topo_sort(loss, order);
    loss->grad.fill(1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

namespace ops {

VarPtr matmul(const VarPtr& a, const VarPtr& w) {
    const std::size_t B = a->value.rows(), n = a->value.cols();
    if (w->value.rows() != n)
        throw DimensionError("matmul: inner dims " + std::to_string(n) + " vs " +
                             std::to_string(w->value.rows()));
    const std::size_t m = w->value.cols();
    Tensor out = Tensor::zeros({B, m});
    {
        const double* ap = a->value.data.data();
        const double* wp = w->value.data.data();
        double* op = out.data.data();
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double av = ap[i * n + k];
                if (av == 0.0) continue;
                const double* wr = wp + k * m;
                double* orow = op + i * m;
                for (std::size_t j = 0; j < m; ++j) orow[j] += av * wr[j];
            }
    }
    return make_op(std::move(out), {a, w}, [a, w, B, n, m](Node& self) {
        const double* gp = self.grad.data.data();
        if (a->requires_grad) {
            const double* wp = w->value.data.data();
            double* agp = a->grad.data.data();
            for (std::size_t i = 0; i < B; ++i)
                for (std::size_t k = 0; k < n; ++k) {
                    const double* wr = wp + k * m;
                    const double* gr = gp + i * m;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < m; ++j) acc += gr[j] * wr[j];
                    agp[i * n + k] += acc;
                }
        }
        if (w->requires_grad) {
            const double* ap = a->value.data.data();
            double* wgp = w->grad.data.data();
            for (std::size_t i = 0; i < B; ++i)
                for (std::size_t k = 0; k < n; ++k) {
                    const double av = ap[i * n + k];
                    if (av == 0.0) continue;
                    double* wgr = wgp + k * m;
                    const double* gr = gp + i * m;
                    for (std::size_t j = 0; j < m; ++j) wgr[j] += av * gr[j];
                }
        }
    });
}

VarPtr add_rowvec(const VarPtr& a, const VarPtr& b) {
    const std::size_t B = a->value.rows(), m = a->value.cols();
    if (b->value.rows() != 1 || b->value.cols() != m)
        throw DimensionError("add_rowvec: bias shape mismatch");
    Tensor out = a->value;
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < m; ++j) out.at(i, j) += b->value.at(0, j);
    return make_op(std::move(out), {a, b}, [a, b, B, m](Node& self) {
        if (a->requires_grad)
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i];
        if (b->requires_grad)
            for (std::size_t i = 0; i < B; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    b->grad.at(0, j) += self.grad.at(i, j);
    });
}

VarPtr add(const VarPtr& a, const VarPtr& b) {
    check_same_shape(a, b, "add");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b->value.data[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& self) {
        if (a->requires_grad)
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i];
        if (b->requires_grad)
            for (std::size_t i = 0; i < b->grad.size(); ++i)
                b->grad.data[i] += self.grad.data[i];
    });
}

VarPtr sub(const VarPtr& a, const VarPtr& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b->value.data[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& self) {
        if (a->requires_grad)
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i];
        if (b->requires_grad)
            for (std::size_t i = 0; i < b->grad.size(); ++i)
                b->grad.data[i] -= self.grad.data[i];
    });
}

VarPtr mul(const VarPtr& a, const VarPtr& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b->value.data[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& self) {
        if (a->requires_grad)
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i] * b->value.data[i];
        if (b->requires_grad)
            for (std::size_t i = 0; i < b->grad.size(); ++i)
                b->grad.data[i] += self.grad.data[i] * a->value.data[i];
    });
}

VarPtr scale_rows(const VarPtr& a, const VarPtr& s) {
    const std::size_t B = a->value.rows(), d = a->value.cols();
    if (s->value.rows() != B || s->value.cols() != 1)
        throw DimensionError("scale_rows: scale must be [B,1]");
    Tensor out = a->value;
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < d; ++j) out.at(i, j) *= s->value.at(i, 0);
    return make_op(std::move(out), {a, s}, [a, s, B, d](Node& self) {
        for (std::size_t i = 0; i < B; ++i) {
            const double sv = s->value.at(i, 0);
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                if (a->requires_grad)
                    a->grad.at(i, j) += self.grad.at(i, j) * sv;
                acc += self.grad.at(i, j) * a->value.at(i, j);
            }
            if (s->requires_grad) s->grad.at(i, 0) += acc;
        }
    });
}

VarPtr mul_const(const VarPtr& a, Tensor c) {
    if (!a->value.same_shape(c))
        throw DimensionError("mul_const: shape mismatch");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= c.data[i];
    auto cc = std::make_shared<Tensor>(std::move(c));
    return make_op(std::move(out), {a}, [a, cc](Node& self) {
        if (a->requires_grad)
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i] * cc->data[i];
    });
}

VarPtr add_const(const VarPtr& a, Tensor c) {
    if (!a->value.same_shape(c))
        throw DimensionError("add_const: shape mismatch");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += c.data[i];
    return make_op(std::move(out), {a}, [a](Node& self) {
        if (a->requires_grad)
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i];
    });
}

VarPtr scale(const VarPtr& a, double c) {
    Tensor out = a->value;
    for (double& v : out.data) v *= c;
    return make_op(std::move(out), {a}, [a, c](Node& self) {
        if (a->requires_grad)
            for (std::size_t i = 0; i < a->grad.size(); ++i)
                a->grad.data[i] += self.grad.data[i] * c;
    });
}

VarPtr relu(const VarPtr& a) {
    Tensor out = a->value;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return make_op(std::move(out), {a}, [a](Node& self) {
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < a->grad.size(); ++i)
            if (a->value.data[i] > 0.0) a->grad.data[i] += self.grad.data[i];
    });
}

VarPtr sigmoid(const VarPtr& a) {
    Tensor out = a->value;
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    return make_op(std::move(out), {a}, [a](Node& self) {
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < a->grad.size(); ++i) {
            const double y = self.value.data[i];
            a->grad.data[i] += self.grad.data[i] * y * (1.0 - y);
        }
    });
}

VarPtr softmax_rows_masked(const VarPtr& x, const std::vector<bool>& valid) {
    const std::size_t B = x->value.rows(), L = x->value.cols();
    if (valid.size() != B * L)
        throw DimensionError("softmax_rows_masked: mask size mismatch");
    Tensor out = Tensor::zeros({B, L});
    for (std::size_t i = 0; i < B; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < L; ++j)
            if (valid[i * L + j]) m = std::max(m, x->value.at(i, j));
        if (!std::isfinite(m)) continue;  // all-padding row -> zeros
        double sum = 0.0;
        for (std::size_t j = 0; j < L; ++j) {
            if (!valid[i * L + j]) continue;
            out.at(i, j) = std::exp(x->value.at(i, j) - m);
            sum += out.at(i, j);
        }
        for (std::size_t j = 0; j < L; ++j) out.at(i, j) /= sum;
    }
    auto vm = std::make_shared<std::vector<bool>>(valid);
    return make_op(std::move(out), {x}, [x, vm, B, L](Node& self) {
        if (!x->requires_grad) return;
        for (std::size_t i = 0; i < B; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < L; ++j)
                dot += self.grad.at(i, j) * self.value.at(i, j);
            for (std::size_t j = 0; j < L; ++j) {
                if (!(*vm)[i * L + j]) continue;
                x->grad.at(i, j) +=
                    self.value.at(i, j) * (self.grad.at(i, j) - dot);
            }
        }
    });
}

VarPtr softmax_rows(const VarPtr& x) {
    return softmax_rows_masked(x, std::vector<bool>(x->value.size(), true));
}

VarPtr l2norm_rows(const VarPtr& x) {
    const std::size_t B = x->value.rows(), d = x->value.cols();
    Tensor out = x->value;
    std::vector<double> norms(B, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) n2 += x->value.at(i, j) * x->value.at(i, j);
        norms[i] = std::sqrt(n2);
        if (norms[i] < kL2NormEpsilon) continue;
        for (std::size_t j = 0; j < d; ++j) out.at(i, j) /= norms[i];
    }
    auto ns = std::make_shared<std::vector<double>>(std::move(norms));
    return make_op(std::move(out), {x}, [x, ns, B, d](Node& self) {
        if (!x->requires_grad) return;
        for (std::size_t i = 0; i < B; ++i) {
            const double n = (*ns)[i];
            if (n < kL2NormEpsilon) {
                for (std::size_t j = 0; j < d; ++j)
                    x->grad.at(i, j) += self.grad.at(i, j);
                continue;
            }
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                dot += self.grad.at(i, j) * self.value.at(i, j);
            for (std::size_t j = 0; j < d; ++j)
                x->grad.at(i, j) +=
                    (self.grad.at(i, j) - self.value.at(i, j) * dot) / n;
        }
    });
}

VarPtr rowwise_dot(const VarPtr& a, const VarPtr& b) {
    check_same_shape(a, b, "rowwise_dot");
    const std::size_t B = a->value.rows(), d = a->value.cols();
    Tensor out = Tensor::zeros({B, 1});
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < d; ++j)
            out.at(i, 0) += a->value.at(i, j) * b->value.at(i, j);
    return make_op(std::move(out), {a, b}, [a, b, B, d](Node& self) {
        for (std::size_t i = 0; i < B; ++i) {
            const double g = self.grad.at(i, 0);
            for (std::size_t j = 0; j < d; ++j) {
                if (a->requires_grad) a->grad.at(i, j) += g * b->value.at(i, j);
                if (b->requires_grad) b->grad.at(i, j) += g * a->value.at(i, j);
            }
        }
    });
}

VarPtr concat_cols(const std::vector<VarPtr>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const std::size_t B = parts[0]->value.rows();
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (p->value.rows() != B)
            throw DimensionError("concat_cols: row count mismatch");
        total += p->value.cols();
    }
    Tensor out = Tensor::zeros({B, total});
    std::size_t off = 0;
    for (const auto& p : parts) {
        const std::size_t c = p->value.cols();
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < c; ++j)
                out.at(i, off + j) = p->value.at(i, j);
        off += c;
    }
    auto ps = parts;
    return make_op(std::move(out), parts, [ps, B](Node& self) {
        std::size_t off = 0;
        for (const auto& p : ps) {
            const std::size_t c = p->value.cols();
            if (p->requires_grad)
                for (std::size_t i = 0; i < B; ++i)
                    for (std::size_t j = 0; j < c; ++j)
                        p->grad.at(i, j) += self.grad.at(i, off + j);
            off += c;
        }
    });
}

VarPtr slice_cols(const VarPtr& a, std::size_t start, std::size_t len) {
    const std::size_t B = a->value.rows();
    if (start + len > a->value.cols())
        throw DimensionError("slice_cols: out of range");
    Tensor out = Tensor::zeros({B, len});
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < len; ++j)
            out.at(i, j) = a->value.at(i, start + j);
    return make_op(std::move(out), {a}, [a, start, len, B](Node& self) {
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < len; ++j)
                a->grad.at(i, start + j) += self.grad.at(i, j);
    });
}

VarPtr tile_rows(const VarPtr& a, std::size_t l) {
    const std::size_t B = a->value.rows(), d = a->value.cols();
    Tensor out = Tensor::zeros({B * l, d});
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t r = 0; r < l; ++r)
            for (std::size_t j = 0; j < d; ++j)
                out.at(i * l + r, j) = a->value.at(i, j);
    return make_op(std::move(out), {a}, [a, l, B, d](Node& self) {
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t r = 0; r < l; ++r)
                for (std::size_t j = 0; j < d; ++j)
                    a->grad.at(i, j) += self.grad.at(i * l + r, j);
    });
}

VarPtr attention_pool(const VarPtr& w, const VarPtr& v) {
    const std::size_t B = w->value.rows(), L = w->value.cols();
    const std::size_t d = v->value.cols();
    if (v->value.rows() != B * L)
        throw DimensionError("attention_pool: V must have B*L rows");
    Tensor out = Tensor::zeros({B, d});
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t l = 0; l < L; ++l) {
            const double wv = w->value.at(i, l);
            if (wv == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j)
                out.at(i, j) += wv * v->value.at(i * L + l, j);
        }
    return make_op(std::move(out), {w, v}, [w, v, B, L, d](Node& self) {
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t l = 0; l < L; ++l) {
                const double wv = w->value.at(i, l);
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double g = self.grad.at(i, j);
                    acc += g * v->value.at(i * L + l, j);
                    if (v->requires_grad) v->grad.at(i * L + l, j) += wv * g;
                }
                if (w->requires_grad) w->grad.at(i, l) += acc;
            }
    });
}

VarPtr reshape(const VarPtr& a, std::size_t rows, std::size_t cols) {
    if (rows * cols != a->value.size())
        throw DimensionError("reshape: element count mismatch");
    Tensor out = a->value;
    out.shape = {rows, cols};
    return make_op(std::move(out), {a}, [a](Node& self) {
        if (!a->requires_grad) return;
        for (std::size_t i = 0; i < a->grad.size(); ++i)
            a->grad.data[i] += self.grad.data[i];
    });
}

VarPtr gather_rows(const VarPtr& table, const std::vector<std::size_t>& indices) {
    const std::size_t V = table->value.rows(), d = table->value.cols();
    Tensor out = Tensor::zeros({indices.size(), d});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= V)
            throw DimensionError("gather_rows: index out of range");
        for (std::size_t j = 0; j < d; ++j)
            out.at(i, j) = table->value.at(indices[i], j);
    }
    auto idx = std::make_shared<std::vector<std::size_t>>(indices);
    return make_op(std::move(out), {table}, [table, idx, d](Node& self) {
        if (!table->requires_grad) return;
        for (std::size_t i = 0; i < idx->size(); ++i)
            for (std::size_t j = 0; j < d; ++j)
                table->grad.at((*idx)[i], j) += self.grad.at(i, j);
    });
}

VarPtr bce_loss(const VarPtr& yhat, const std::vector<double>& labels) {
    const std::size_t B = yhat->value.rows();
    if (yhat->value.cols() != 1 || labels.size() != B)
        throw DimensionError("bce_loss: expects [B,1] predictions");
    constexpr double eps = 1e-12;
    double total = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        const double p = std::clamp(yhat->value.at(i, 0), eps, 1.0 - eps);
        const double y = labels[i];
        total += -y * std::log(p) - (1.0 - y) * std::log(1.0 - p);
    }
    Tensor out = Tensor::full({1, 1}, total / static_cast<double>(B));
    auto ls = std::make_shared<std::vector<double>>(labels);
    return make_op(std::move(out), {yhat}, [yhat, ls, B](Node& self) {
        if (!yhat->requires_grad) return;
        const double g = self.grad.at(0, 0) / static_cast<double>(B);
        for (std::size_t i = 0; i < B; ++i) {
            const double raw = yhat->value.at(i, 0);
            if (raw <= 1e-12 || raw >= 1.0 - 1e-12) continue;  // clamped region
            yhat->grad.at(i, 0) += g * (raw - (*ls)[i]) / (raw * (1.0 - raw));
        }
    });
}

VarPtr sum_all(const VarPtr& a) {
    double total = 0.0;
    for (double v : a->value.data) total += v;
    Tensor out = Tensor::full({1, 1}, total);
    return make_op(std::move(out), {a}, [a](Node& self) {
        if (!a->requires_grad) return;
        const double g = self.grad.at(0, 0);
        for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad.data[i] += g;
    });
}

}  // namespace ops
}  // namespace stim
