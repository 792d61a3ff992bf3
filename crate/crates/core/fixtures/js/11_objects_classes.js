const api = {
  save: function (data) {},
  load(id) {},
  remove: (id) => {},
};
class Player {
  play(song) {}
  static create(options) {}
}
function standalone() {}
