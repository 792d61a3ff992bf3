const greet = function (name) {
  return "hi " + name;
};
var named = function innerName(a, b) {};
let generator = function* (seed) {};
