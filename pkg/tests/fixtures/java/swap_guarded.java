import java.util.Vector;

public class VectorSwap {
    public static void swap(Vector<Integer> v, int i, int j) {
        if (i < 0 || i >= v.size() || j < 0 || j >= v.size()) {
            throw new ArrayIndexOutOfBoundsException("index out of range");
        }
        int first = v.get(i);
        int second = v.get(j);
        v.set(i, second);
        v.set(j, first);
    }
}
