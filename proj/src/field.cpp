#include "gridnet/field.hpp"

#include "gridnet/errors.hpp"

namespace gridnet {

Field::Field(std::shared_ptr<const GridGraph> g, int T_) : grid(std::move(g)), T(T_) {
  if (!grid) throw config_error("field requires a grid");
  if (T <= 0) throw config_error("field length must be positive");
  data.assign(static_cast<std::size_t>(grid->n_cells) * T, 0.0);
}

}  // namespace gridnet
