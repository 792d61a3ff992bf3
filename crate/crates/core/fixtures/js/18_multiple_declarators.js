const a = 1, b = (x) => x, c = function (y, z) {};
let d, e = () => {};
var f = [1, 2], g = async function (h) {};
