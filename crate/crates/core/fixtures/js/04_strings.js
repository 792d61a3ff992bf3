const template = "function notMe(a) {}";
const single = 'function norMe() {}';
const escaped = "quote \" function stillNot(x) {";
function afterStrings(value) {
  return value + '}';
}
