const pattern = /function fake\(x\) {/g;
const braces = /[{}]/;
function matchAll(text) {
  return text.match(/\/\*[^]*?\*\//g);
}
const ratio = total / count / 2;
function afterDivision(a) {}
