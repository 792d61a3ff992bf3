(function () {
  function privateFn(x) {}
})();
document.addEventListener("click", function onClick(event) {});
setTimeout(() => {
  const later = (y) => y;
}, 10);
function visible(z) {}
