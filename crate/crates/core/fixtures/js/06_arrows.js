const add = (a, b) => a + b;
let square = x => x * x;
var noArgs = () => {
  return 1;
};
const asyncArrow = async (url, options) => fetch(url, options);
