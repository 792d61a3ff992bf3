const html = `
  <div onclick="function fake() {}">${items.map((i) => `<li>${i}</li>`).join("")}</div>
`;
function render(items, target) {
  target.innerHTML = `${items.length} items { }`;
}
