const value = (1 + 2) * 3;
const grouped = (a, b);
let items = [function (x) {}, (y) => y];
var config = { handler: () => {} };
const called = make((q) => q);
