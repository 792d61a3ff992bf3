for (let i = 0; i < 3; i++) {
  function inLoop(i) {}
}
while (false) {
  const inWhile = () => {};
}
switch (mode) {
  case 1:
    function inCase() {}
    break;
  default: {
    const inDefault = (v) => v;
  }
}
const picked = ready ? { a: 1 } : { b: function notHere() {} };
function last(n) {}
