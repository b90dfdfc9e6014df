// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "glyphembed/error.hpp"

namespace glyphembed {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (auto extent : shape_) GLYPHEMBED_EXPECT(extent > 0, "tensor extents must be positive");
  values_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
  for (auto extent : shape_) GLYPHEMBED_EXPECT(extent > 0, "tensor extents must be positive");
  GLYPHEMBED_EXPECT(values_.size() == element_count(shape_), "tensor value count does not match shape");
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Parameter::Parameter(std::string name, Shape shape)
    : name_(std::move(name)), value_(shape), grad_(std::move(shape)) {}

ParameterStore::ParameterStore(const ParameterStore& other) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
}

ParameterStore& ParameterStore::operator=(const ParameterStore& other) {
  if (this != &other) {
    ParameterStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Parameter& ParameterStore::add(std::string name, Shape shape) {
  GLYPHEMBED_EXPECT(find(name) == nullptr, "duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(shape)));
  return *params_.back();
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name() == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  return const_cast<ParameterStore*>(this)->find(name);
}

Parameter& ParameterStore::at(std::string_view name) {
  Parameter* p = find(name);
  GLYPHEMBED_EXPECT(p != nullptr, "unknown parameter: " + std::string(name));
  return *p;
}

const Parameter& ParameterStore::at(std::string_view name) const {
  return const_cast<ParameterStore*>(this)->at(name);
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  GLYPHEMBED_EXPECT(other.size() == size(), "parameter stores differ in size");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    GLYPHEMBED_EXPECT(params_[i]->name() == other[i].name() && params_[i]->shape() == other[i].shape(),
                      "parameter stores differ in layout");
    params_[i]->value() = other[i].value();
  }
}

}  // namespace glyphembed
