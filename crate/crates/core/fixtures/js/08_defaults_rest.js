function withDefaults(a, b = 2, c = { x: 1 }) {}
const withRest = (first, ...others) => others;
function both(size = [1, 2].length, ...rest) {}
