if (typeof window !== "undefined") {
  function inIf(a) {}
} else {
  const inElse = (b) => b;
}
try {
  function inTry() {}
} catch (err) {
  function inCatch(e) {}
}
{
  let inBlock = function (c) {};
}
