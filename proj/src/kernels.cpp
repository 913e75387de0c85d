#include "hsstokes/kernels.hpp"

namespace hsstokes::kernels {

template double gauss1d<double>(int, double, double);
template long double gauss1d<long double>(int, long double, long double);
template double gaussian<double>(const MultiIndex&, const Vec<double>&, double);
template long double gaussian<long double>(const MultiIndex&, const Vec<long double>&, long double);
template double newtonian<double>(const MultiIndex&, const Vec<double>&);
template long double newtonian<long double>(const MultiIndex&, const Vec<long double>&);

}  // namespace hsstokes::kernels
